//! Crossover and mutation operators.
//!
//! Every operator keeps chromosomes valid by construction: machine-assignment
//! children take each locus from one of the parents, and operation-sequence
//! children preserve some loci and refill the rest with the same job multiset.

use std::fmt;
use std::str::FromStr;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::genome::Chromosome;
use crate::initializer::name_enum;
use crate::instance::FjspInstance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaCrossover {
    None,
    OnePoint,
    TwoPoint,
    /// Job-based: swap the assignments of every operation of the masked jobs.
    Jx,
    /// Multi-point preservative: swap the masked loci.
    Mpx,
}

impl MaCrossover {
    pub const ALL: [MaCrossover; 5] = [
        MaCrossover::None,
        MaCrossover::OnePoint,
        MaCrossover::TwoPoint,
        MaCrossover::Jx,
        MaCrossover::Mpx,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OsCrossover {
    None,
    /// Precedence preserving one point.
    Ppop,
    /// Precedence preserving two points.
    Pptp,
    /// Improved precedence operation crossover.
    Ipox,
    /// Uniform preservative.
    Upx,
}

impl OsCrossover {
    pub const ALL: [OsCrossover; 5] = [
        OsCrossover::None,
        OsCrossover::Ppop,
        OsCrossover::Pptp,
        OsCrossover::Ipox,
        OsCrossover::Upx,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mutation {
    Insertion,
    Swap1,
    Swap2,
}

name_enum!(MaCrossover {
    None => "none",
    OnePoint => "onepoint",
    TwoPoint => "twopoint",
    Jx => "jx",
    Mpx => "mpx",
});
name_enum!(OsCrossover {
    None => "none",
    Ppop => "ppop",
    Pptp => "pptp",
    Ipox => "ipox",
    Upx => "upx",
});
name_enum!(Mutation {
    Insertion => "insertion",
    Swap1 => "swap1",
    Swap2 => "swap2",
});

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{name} = {value} is not a probability")]
    NotProbability { name: &'static str, value: f64 },
    #[error("{name} = {value} must have at most one decimal digit")]
    NotOneDecimal { name: &'static str, value: f64 },
}

/// Variation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariationConfig {
    pub crossover_probability: f64,
    pub p_insert: f64,
    pub p_swap1: f64,
    pub p_swap2: f64,
    /// Chance of accepting a re-drawn machine with a strictly longer duration.
    pub machine_accept_worse: f64,
    /// Pins the machine-assignment crossover instead of drawing it per mating.
    pub ma_crossover: Option<MaCrossover>,
    /// Pins the operation-sequence crossover instead of drawing it per mating.
    pub os_crossover: Option<OsCrossover>,
}

impl Default for VariationConfig {
    fn default() -> Self {
        Self::with_mutation(0.6, 0.6, 0.6)
    }
}

impl VariationConfig {
    pub fn with_mutation(p_insert: f64, p_swap1: f64, p_swap2: f64) -> Self {
        Self {
            crossover_probability: 1.0,
            p_insert,
            p_swap1,
            p_swap2,
            machine_accept_worse: 0.2,
            ma_crossover: None,
            os_crossover: None,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let all = [
            ("crossover_probability", self.crossover_probability),
            ("p_insert", self.p_insert),
            ("p_swap1", self.p_swap1),
            ("p_swap2", self.p_swap2),
            ("machine_accept_worse", self.machine_accept_worse),
        ];
        for (name, value) in all {
            if !(0.0..=1.0).contains(&value) {
                return Err(ConfigError::NotProbability { name, value });
            }
        }
        for (name, value) in &all[1..4] {
            if ((value * 10.0).round() - value * 10.0).abs() > 1e-9 {
                return Err(ConfigError::NotOneDecimal { name, value: *value });
            }
        }
        Ok(())
    }
}

// ------------------------------------------------------------------
// Machine-assignment crossover kernels
// ------------------------------------------------------------------

/// Swaps the loci where `mask` is set.
pub fn swap_masked(p1: &[usize], p2: &[usize], mask: &[bool]) -> (Vec<usize>, Vec<usize>) {
    let mut c1 = p1.to_vec();
    let mut c2 = p2.to_vec();
    for (i, &m) in mask.iter().enumerate() {
        if m {
            c1[i] = p2[i];
            c2[i] = p1[i];
        }
    }
    (c1, c2)
}

/// Swaps every locus at or after `cut`.
pub fn one_point(p1: &[usize], p2: &[usize], cut: usize) -> (Vec<usize>, Vec<usize>) {
    let mask: Vec<bool> = (0..p1.len()).map(|i| i >= cut).collect();
    swap_masked(p1, p2, &mask)
}

/// Swaps the loci in `[from, to)`.
pub fn two_point(p1: &[usize], p2: &[usize], from: usize, to: usize) -> (Vec<usize>, Vec<usize>) {
    let mask: Vec<bool> = (0..p1.len()).map(|i| (from..to).contains(&i)).collect();
    swap_masked(p1, p2, &mask)
}

/// Expands a per-job mask to the fixed machine-assignment order.
pub fn job_mask_to_loci(job_mask: &[bool], instance: &FjspInstance) -> Vec<bool> {
    (0..instance.total_operations())
        .map(|flat| job_mask[instance.job_of(flat)])
        .collect()
}

pub fn crossover_ma<R: Rng + ?Sized>(
    operator: MaCrossover,
    p1: &[usize],
    p2: &[usize],
    instance: &FjspInstance,
    rng: &mut R,
) -> (Vec<usize>, Vec<usize>) {
    let n = p1.len();
    match operator {
        MaCrossover::None => (p1.to_vec(), p2.to_vec()),
        _ if n < 2 => (p1.to_vec(), p2.to_vec()),
        MaCrossover::OnePoint => one_point(p1, p2, rng.random_range(1..n)),
        MaCrossover::TwoPoint => {
            let (a, b) = two_cuts(n, rng);
            two_point(p1, p2, a, b)
        }
        MaCrossover::Jx => {
            let jobs: Vec<bool> = (0..instance.num_jobs()).map(|_| rng.random_bool(0.5)).collect();
            swap_masked(p1, p2, &job_mask_to_loci(&jobs, instance))
        }
        MaCrossover::Mpx => {
            let mask: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
            swap_masked(p1, p2, &mask)
        }
    }
}

/// Two distinct cut points in `0..=n`, ordered.
fn two_cuts<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (usize, usize) {
    let a = rng.random_range(0..=n);
    let mut b = rng.random_range(0..n);
    if b >= a {
        b += 1;
    }
    (a.min(b), a.max(b))
}

// ------------------------------------------------------------------
// Operation-sequence crossover kernels
// ------------------------------------------------------------------

/// Keeps `own[i]` wherever `keep[i]` holds and refills the other loci, left to
/// right, with the dropped job indices in the order they are met while
/// scanning `donor`.
pub fn preserve_and_refill(own: &[usize], donor: &[usize], keep: &[bool], num_jobs: usize) -> Vec<usize> {
    let mut needed = vec![0usize; num_jobs];
    for (i, &job) in own.iter().enumerate() {
        if !keep[i] {
            needed[job] += 1;
        }
    }
    let mut fill = donor.iter().filter(|&&job| {
        if needed[job] > 0 {
            needed[job] -= 1;
            true
        } else {
            false
        }
    });
    own.iter()
        .zip(keep)
        .map(|(&job, &k)| if k { job } else { *fill.next().expect("donor carries the same multiset") })
        .collect()
}

fn refill_pair(p1: &[usize], p2: &[usize], keep1: &[bool], keep2: &[bool], num_jobs: usize) -> (Vec<usize>, Vec<usize>) {
    (
        preserve_and_refill(p1, p2, keep1, num_jobs),
        preserve_and_refill(p2, p1, keep2, num_jobs),
    )
}

/// Precedence preserving one point crossover: loci before `cut` are kept.
pub fn ppop(p1: &[usize], p2: &[usize], cut: usize, num_jobs: usize) -> (Vec<usize>, Vec<usize>) {
    let keep: Vec<bool> = (0..p1.len()).map(|i| i < cut).collect();
    refill_pair(p1, p2, &keep, &keep, num_jobs)
}

/// Precedence preserving two point crossover: loci in `[from, to)` are reallocated.
pub fn pptp(p1: &[usize], p2: &[usize], from: usize, to: usize, num_jobs: usize) -> (Vec<usize>, Vec<usize>) {
    let keep: Vec<bool> = (0..p1.len()).map(|i| !(from..to).contains(&i)).collect();
    refill_pair(p1, p2, &keep, &keep, num_jobs)
}

/// IPOX: child 1 keeps parent 1's genes of the jobs in `subset`, child 2 keeps
/// parent 2's genes of the complementary jobs.
pub fn ipox(p1: &[usize], p2: &[usize], subset: &[bool]) -> (Vec<usize>, Vec<usize>) {
    let keep1: Vec<bool> = p1.iter().map(|&j| subset[j]).collect();
    let keep2: Vec<bool> = p2.iter().map(|&j| !subset[j]).collect();
    refill_pair(p1, p2, &keep1, &keep2, subset.len())
}

/// UPX: loci with a cleared mask bit are kept.
pub fn upx(p1: &[usize], p2: &[usize], mask: &[bool], num_jobs: usize) -> (Vec<usize>, Vec<usize>) {
    let keep: Vec<bool> = mask.iter().map(|m| !m).collect();
    refill_pair(p1, p2, &keep, &keep, num_jobs)
}

pub fn crossover_os<R: Rng + ?Sized>(
    operator: OsCrossover,
    p1: &[usize],
    p2: &[usize],
    num_jobs: usize,
    rng: &mut R,
) -> (Vec<usize>, Vec<usize>) {
    let n = p1.len();
    match operator {
        OsCrossover::None => (p1.to_vec(), p2.to_vec()),
        _ if n < 2 => (p1.to_vec(), p2.to_vec()),
        OsCrossover::Ppop => ppop(p1, p2, rng.random_range(1..n), num_jobs),
        OsCrossover::Pptp => {
            let (a, b) = two_cuts(n, rng);
            pptp(p1, p2, a, b, num_jobs)
        }
        OsCrossover::Ipox => {
            if num_jobs < 2 {
                return (p1.to_vec(), p2.to_vec());
            }
            let mut jobs: Vec<usize> = (0..num_jobs).collect();
            jobs.shuffle(rng);
            let size = rng.random_range(1..num_jobs);
            let mut subset = vec![false; num_jobs];
            for &j in &jobs[..size] {
                subset[j] = true;
            }
            ipox(p1, p2, &subset)
        }
        OsCrossover::Upx => {
            let mask: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
            upx(p1, p2, &mask, num_jobs)
        }
    }
}

// ------------------------------------------------------------------
// Mutation
// ------------------------------------------------------------------

/// Moves the gene at `from` in front of the gene currently at `before`.
pub fn insert_before(os: &mut Vec<usize>, before: usize, from: usize) {
    if before == from {
        return;
    }
    let gene = os.remove(from);
    let target = if from < before { before - 1 } else { before };
    os.insert(target, gene);
}

/// Neighbour used by the single-point swap: right, or left at the last position.
pub fn swap1_partner(i: usize, len: usize) -> usize {
    if i + 1 < len {
        i + 1
    } else {
        i.saturating_sub(1)
    }
}

/// Re-draws the machine of operation `flat` uniformly, keeping it when the new
/// duration is not longer and otherwise with probability `accept_worse`.
pub fn redraw_machine<R: Rng + ?Sized>(
    ma: &mut [usize],
    flat: usize,
    instance: &FjspInstance,
    accept_worse: f64,
    rng: &mut R,
) {
    let alts = &instance.operation(flat).alternatives;
    if alts.len() < 2 {
        return;
    }
    let candidate = rng.random_range(0..alts.len());
    let old = alts[ma[flat]].duration;
    let new = alts[candidate].duration;
    if new <= old || rng.random_bool(accept_worse) {
        ma[flat] = candidate;
    }
}

/// Applies one mutation kind at explicit positions.
pub fn mutate_at<R: Rng + ?Sized>(
    kind: Mutation,
    c: &Chromosome,
    i: usize,
    j: usize,
    instance: &FjspInstance,
    accept_worse: f64,
    rng: &mut R,
) -> Chromosome {
    let mut out = c.clone();
    let n = c.os.len();
    if n == 0 {
        return out;
    }
    let sequence = c.sequence(instance);
    let touched: Vec<usize> = match kind {
        Mutation::Insertion => {
            insert_before(&mut out.os, i, j);
            vec![sequence[i], sequence[j]]
        }
        Mutation::Swap1 => {
            out.os.swap(i, swap1_partner(i, n));
            vec![sequence[i]]
        }
        Mutation::Swap2 => {
            out.os.swap(i, j);
            vec![sequence[i], sequence[j]]
        }
    };
    let mut seen = Vec::with_capacity(2);
    for flat in touched {
        if !seen.contains(&flat) {
            seen.push(flat);
            redraw_machine(&mut out.ma, flat, instance, accept_worse, rng);
        }
    }
    out
}

pub fn mutate<R: Rng + ?Sized>(
    kind: Mutation,
    c: &Chromosome,
    instance: &FjspInstance,
    config: &VariationConfig,
    rng: &mut R,
) -> Chromosome {
    let n = c.os.len();
    if n == 0 {
        return c.clone();
    }
    let i = rng.random_range(0..n);
    let j = rng.random_range(0..n);
    mutate_at(kind, c, i, j, instance, config.machine_accept_worse, rng)
}

/// Produces two children: one random crossover per vector, then each mutation
/// kind independently with its probability, in insertion, swap1, swap2 order.
pub fn make_offspring<R: Rng + ?Sized>(
    p1: &Chromosome,
    p2: &Chromosome,
    instance: &FjspInstance,
    config: &VariationConfig,
    rng: &mut R,
) -> (Chromosome, Chromosome) {
    let (mut c1, mut c2) = if rng.random_bool(config.crossover_probability) {
        let ma_op = config
            .ma_crossover
            .unwrap_or_else(|| *MaCrossover::ALL.choose(rng).unwrap());
        let os_op = config
            .os_crossover
            .unwrap_or_else(|| *OsCrossover::ALL.choose(rng).unwrap());
        let (ma1, ma2) = crossover_ma(ma_op, &p1.ma, &p2.ma, instance, rng);
        let (os1, os2) = crossover_os(os_op, &p1.os, &p2.os, instance.num_jobs(), rng);
        (Chromosome { os: os1, ma: ma1 }, Chromosome { os: os2, ma: ma2 })
    } else {
        (p1.clone(), p2.clone())
    };
    for child in [&mut c1, &mut c2] {
        for (kind, p) in [
            (Mutation::Insertion, config.p_insert),
            (Mutation::Swap1, config.p_swap1),
            (Mutation::Swap2, config.p_swap2),
        ] {
            if rng.random_bool(p) {
                *child = mutate(kind, child, instance, config, rng);
            }
        }
    }
    (c1, c2)
}

impl fmt::Display for VariationConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "pc={} insert={} swap1={} swap2={}",
            self.crossover_probability, self.p_insert, self.p_swap1, self.p_swap2
        )
    }
}
