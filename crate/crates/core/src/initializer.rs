//! Initial population construction.
//!
//! Each individual pairs one machine-assignment heuristic with one
//! operation-sequence heuristic, both drawn uniformly at random unless the
//! caller pins them.

use std::fmt;
use std::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::genome::Chromosome;
use crate::instance::{FjspInstance, Time};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaInit {
    /// Uniform over capable machines.
    Random,
    /// Roulette wheel weighted by `1 / t`.
    Prw,
    /// Roulette wheel weighted by `1 / (W_k + t)`, workloads accumulated in fixed order.
    Wrw,
}

impl MaInit {
    pub const ALL: [MaInit; 3] = [MaInit::Random, MaInit::Prw, MaInit::Wrw];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OsInit {
    Random,
    /// Most work remaining.
    Mwr,
    /// Most operations remaining.
    Mor,
    /// Longest processing time among the eligible operations.
    Lpt,
    /// Most remaining machine operations, then most remaining job operations.
    Mrmo,
    /// Most remaining machine workload, then most remaining job workload.
    Mrmw,
}

impl OsInit {
    pub const ALL: [OsInit; 6] = [
        OsInit::Random,
        OsInit::Mwr,
        OsInit::Mor,
        OsInit::Lpt,
        OsInit::Mrmo,
        OsInit::Mrmw,
    ];
}

macro_rules! name_enum {
    ($ty:ty { $($variant:ident => $name:literal),+ $(,)? }) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $(Self::$variant => $name),+ })
            }
        }

        impl FromStr for $ty {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, String> {
                match s.to_ascii_lowercase().as_str() {
                    $($name => Ok(Self::$variant),)+
                    other => Err(format!(
                        "unknown method `{other}` (expected one of: {})",
                        [$($name),+].join(", ")
                    )),
                }
            }
        }
    };
}
pub(crate) use name_enum;

name_enum!(MaInit { Random => "random", Prw => "prw", Wrw => "wrw" });
name_enum!(OsInit {
    Random => "random",
    Mwr => "mwr",
    Mor => "mor",
    Lpt => "lpt",
    Mrmo => "mrmo",
    Mrmw => "mrmw",
});

/// Optional pinning of the heuristics, for ablation runs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InitConfig {
    pub ma: Option<MaInit>,
    pub os: Option<OsInit>,
}

/// Builds a machine-assignment vector.
pub fn init_ma<R: Rng + ?Sized>(method: MaInit, instance: &FjspInstance, rng: &mut R) -> Vec<usize> {
    let mut workload: Vec<Time> = vec![0; instance.num_machines()];
    instance
        .operations()
        .map(|op| {
            let alts = &op.alternatives;
            if alts.len() == 1 {
                workload[alts[0].machine] += alts[0].duration;
                return 0;
            }
            let pick = match method {
                MaInit::Random => rng.random_range(0..alts.len()),
                MaInit::Prw => roulette(alts.iter().map(|a| 1.0 / a.duration as f64), rng),
                MaInit::Wrw => roulette(
                    alts.iter()
                        .map(|a| 1.0 / (workload[a.machine] + a.duration) as f64),
                    rng,
                ),
            };
            workload[alts[pick].machine] += alts[pick].duration;
            pick
        })
        .collect()
}

fn roulette<R: Rng + ?Sized>(weights: impl Iterator<Item = f64>, rng: &mut R) -> usize {
    // Weights are finite and strictly positive by construction.
    WeightedIndex::new(weights)
        .expect("roulette weights are positive")
        .sample(rng)
}

/// Bookkeeping shared by the dispatching rules.
struct Dispatch<'a> {
    instance: &'a FjspInstance,
    /// Assigned duration of every flat operation.
    duration: Vec<Time>,
    /// Assigned machine of every flat operation.
    machine: Vec<usize>,
    placed: Vec<usize>,
    job_ops_left: Vec<usize>,
    job_work_left: Vec<Time>,
    machine_ops_left: Vec<usize>,
    machine_work_left: Vec<Time>,
}

impl<'a> Dispatch<'a> {
    fn new(instance: &'a FjspInstance, ma: &[usize]) -> Self {
        let n_ops = instance.total_operations();
        let mut duration = Vec::with_capacity(n_ops);
        let mut machine = Vec::with_capacity(n_ops);
        for (flat, op) in instance.operations().enumerate() {
            let alt = op.alternatives[ma[flat]];
            duration.push(alt.duration);
            machine.push(alt.machine);
        }
        let mut job_work_left = vec![0; instance.num_jobs()];
        let mut machine_ops_left = vec![0; instance.num_machines()];
        let mut machine_work_left = vec![0; instance.num_machines()];
        for flat in 0..n_ops {
            job_work_left[instance.job_of(flat)] += duration[flat];
            machine_ops_left[machine[flat]] += 1;
            machine_work_left[machine[flat]] += duration[flat];
        }
        Self {
            instance,
            duration,
            machine,
            placed: vec![0; instance.num_jobs()],
            job_ops_left: (0..instance.num_jobs()).map(|j| instance.job_len(j)).collect(),
            job_work_left,
            machine_ops_left,
            machine_work_left,
        }
    }

    /// Flat index of the next unplaced operation of `job`, if any.
    fn next_op(&self, job: usize) -> Option<usize> {
        (self.job_ops_left[job] > 0).then(|| self.instance.job_offset(job) + self.placed[job])
    }

    fn open_jobs(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.instance.num_jobs()).filter(|&j| self.job_ops_left[j] > 0)
    }

    fn place(&mut self, job: usize, os: &mut Vec<usize>) {
        let flat = self.next_op(job).expect("job has an unplaced operation");
        self.placed[job] += 1;
        self.job_ops_left[job] -= 1;
        self.job_work_left[job] -= self.duration[flat];
        self.machine_ops_left[self.machine[flat]] -= 1;
        self.machine_work_left[self.machine[flat]] -= self.duration[flat];
        os.push(job);
    }

    /// Open job maximising `key`; ties go to the lowest job index.
    fn best_job<K: Ord>(&self, jobs: impl Iterator<Item = usize>, key: impl Fn(usize) -> K) -> Option<usize> {
        let mut best: Option<(usize, K)> = None;
        for j in jobs {
            let k = key(j);
            if best.as_ref().is_none_or(|(_, bk)| k > *bk) {
                best = Some((j, k));
            }
        }
        best.map(|(j, _)| j)
    }

    /// Two-level rule: rank machines by `machine_key` (descending, ties by
    /// index), take the first machine that owns at least one eligible
    /// operation, and among those pick the job maximising `job_key`.
    fn hierarchical<K: Ord + Copy>(&self, machine_key: &[K], job_key: &[K]) -> usize {
        let mut machines: Vec<usize> = (0..self.instance.num_machines())
            .filter(|&k| self.machine_ops_left[k] > 0)
            .collect();
        machines.sort_by(|&a, &b| machine_key[b].cmp(&machine_key[a]).then(a.cmp(&b)));
        for k in machines {
            let eligible = self
                .open_jobs()
                .filter(|&j| self.next_op(j).is_some_and(|f| self.machine[f] == k));
            if let Some(job) = self.best_job(eligible, |j| job_key[j]) {
                return job;
            }
        }
        unreachable!("the first unplaced operation of any open job is always eligible")
    }
}

/// Builds an operation-sequence vector consistent with `ma`.
pub fn init_os<R: Rng + ?Sized>(
    method: OsInit,
    ma: &[usize],
    instance: &FjspInstance,
    rng: &mut R,
) -> Vec<usize> {
    let n_ops = instance.total_operations();
    if method == OsInit::Random {
        let mut os: Vec<usize> = (0..instance.num_jobs())
            .flat_map(|j| std::iter::repeat_n(j, instance.job_len(j)))
            .collect();
        os.shuffle(rng);
        return os;
    }

    let mut state = Dispatch::new(instance, ma);
    let mut os = Vec::with_capacity(n_ops);
    while os.len() < n_ops {
        let job = match method {
            OsInit::Mwr => state.best_job(state.open_jobs(), |j| state.job_work_left[j]),
            OsInit::Mor => state.best_job(state.open_jobs(), |j| state.job_ops_left[j]),
            OsInit::Lpt => state.best_job(state.open_jobs(), |j| {
                state.duration[state.next_op(j).expect("open job")]
            }),
            OsInit::Mrmo => {
                let machine_key: Vec<Time> = state.machine_ops_left.iter().map(|&c| c as Time).collect();
                let job_key: Vec<Time> = state.job_ops_left.iter().map(|&c| c as Time).collect();
                Some(state.hierarchical(&machine_key, &job_key))
            }
            OsInit::Mrmw => Some(state.hierarchical(&state.machine_work_left, &state.job_work_left)),
            OsInit::Random => unreachable!(),
        }
        .expect("an open job exists while operations remain");
        state.place(job, &mut os);
    }
    os
}

/// Builds one individual from a specific heuristic pair.
pub fn build_individual<R: Rng + ?Sized>(
    ma_method: MaInit,
    os_method: OsInit,
    instance: &FjspInstance,
    rng: &mut R,
) -> Chromosome {
    let ma = init_ma(ma_method, instance, rng);
    let os = init_os(os_method, &ma, instance, rng);
    Chromosome { os, ma }
}

/// Builds `size` chromosomes, sampling a heuristic pair independently per individual.
pub fn generate_population<R: Rng + ?Sized>(
    size: usize,
    instance: &FjspInstance,
    config: InitConfig,
    rng: &mut R,
) -> Vec<Chromosome> {
    (0..size)
        .map(|_| {
            let ma_method = config.ma.unwrap_or_else(|| *MaInit::ALL.choose(rng).unwrap());
            let os_method = config.os.unwrap_or_else(|| *OsInit::ALL.choose(rng).unwrap());
            build_individual(ma_method, os_method, instance, rng)
        })
        .collect()
}
