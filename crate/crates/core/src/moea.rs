//! NSGA-III: reference points, non-dominated sorting, normalisation,
//! niching and the generational loop.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decoder::{evaluate_with, Level2Status, ObjectiveVector, LEVEL2_PROBABILITY};
use crate::genome::Chromosome;
use crate::initializer::{generate_population, InitConfig};
use crate::instance::FjspInstance;
use crate::metrics::{dominates, hypervolume3, reference_from_points, HvReference};
use crate::variation::{make_offspring, ConfigError, VariationConfig};

/// Weight used for the non-target axes of the extreme-point scalarising function.
const ASF_EPSILON: f64 = 1e-6;
/// Intercepts at or below this are treated as degenerate.
const INTERCEPT_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Individual {
    pub chromosome: Chromosome,
    pub objectives: ObjectiveVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferencePointSet {
    pub divisions: usize,
    pub points: Vec<[f64; 3]>,
}

/// All three-component simplex-lattice points with denominator `divisions`.
pub fn das_dennis(divisions: usize) -> ReferencePointSet {
    let p = divisions.max(1);
    let mut points = Vec::with_capacity((p + 1) * (p + 2) / 2);
    for a in (0..=p).rev() {
        for b in (0..=p - a).rev() {
            let c = p - a - b;
            points.push([a, b, c].map(|x| x as f64 / p as f64));
        }
    }
    ReferencePointSet { divisions: p, points }
}

/// Front indices into `objectives`, best first; members of each front ascend.
pub fn fast_nondominated_sort(objectives: &[ObjectiveVector]) -> Vec<Vec<usize>> {
    let n = objectives.len();
    let mut dominated_by_count = vec![0usize; n];
    let mut dominates_list: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            if dominates(&objectives[i], &objectives[j]) {
                dominates_list[i].push(j);
                dominated_by_count[j] += 1;
            } else if dominates(&objectives[j], &objectives[i]) {
                dominates_list[j].push(i);
                dominated_by_count[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominates_list[i] {
                dominated_by_count[j] -= 1;
                if dominated_by_count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(std::mem::replace(&mut current, next));
    }
    fronts
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Association {
    pub reference: usize,
    pub distance: f64,
}

/// Translates by the ideal point and scales by the hyperplane intercepts.
pub fn normalize(objectives: &[[f64; 3]]) -> Vec<[f64; 3]> {
    if objectives.is_empty() {
        return Vec::new();
    }
    let mut ideal = [f64::INFINITY; 3];
    for f in objectives {
        for k in 0..3 {
            ideal[k] = ideal[k].min(f[k]);
        }
    }
    let translated: Vec<[f64; 3]> = objectives
        .iter()
        .map(|f| [0, 1, 2].map(|k| f[k] - ideal[k]))
        .collect();
    let intercepts = intercepts(&translated);
    translated
        .iter()
        .map(|f| [0, 1, 2].map(|k| f[k] / intercepts[k]))
        .collect()
}

fn intercepts(translated: &[[f64; 3]]) -> [f64; 3] {
    let mut max = [0.0f64; 3];
    for f in translated {
        for k in 0..3 {
            max[k] = max[k].max(f[k]);
        }
    }
    let fallback = max.map(|m| if m > INTERCEPT_EPSILON { m } else { 1.0 });
    let extremes: [[f64; 3]; 3] = [0, 1, 2].map(|axis| {
        let asf = |f: &[f64; 3]| {
            (0..3)
                .map(|k| f[k] / if k == axis { 1.0 } else { ASF_EPSILON })
                .fold(f64::NEG_INFINITY, f64::max)
        };
        *translated
            .iter()
            .min_by(|a, b| asf(a).total_cmp(&asf(b)))
            .expect("non-empty")
    });
    match solve3(extremes, [1.0; 3]) {
        Some(b) => {
            let a = b.map(|x| 1.0 / x);
            if a.iter().all(|x| x.is_finite() && *x > INTERCEPT_EPSILON) {
                a
            } else {
                fallback
            }
        }
        None => fallback,
    }
}

/// Solves `m x = rhs` by Gaussian elimination with partial pivoting.
fn solve3(mut m: [[f64; 3]; 3], mut rhs: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[pivot][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..3 {
            let factor = m[row][col] / m[col][col];
            let pivot_row = m[col];
            for (cell, p) in m[row].iter_mut().zip(pivot_row).skip(col) {
                *cell -= factor * p;
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let tail: f64 = (row + 1..3).map(|k| m[row][k] * x[k]).sum();
        x[row] = (rhs[row] - tail) / m[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Perpendicular distance from `f` to the line through the origin along `w`.
pub fn perpendicular_distance(f: &[f64; 3], w: &[f64; 3]) -> f64 {
    let ww: f64 = w.iter().map(|x| x * x).sum();
    let t = f.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / ww;
    (0..3).map(|k| (f[k] - t * w[k]).powi(2)).sum::<f64>().sqrt()
}

/// Closest reference line for each normalised point; ties go to the lower index.
pub fn associate(normalized: &[[f64; 3]], refs: &ReferencePointSet) -> Vec<Association> {
    normalized
        .iter()
        .map(|f| {
            let mut best = Association {
                reference: 0,
                distance: f64::INFINITY,
            };
            for (j, w) in refs.points.iter().enumerate() {
                let d = perpendicular_distance(f, w);
                if d < best.distance {
                    best = Association { reference: j, distance: d };
                }
            }
            best
        })
        .collect()
}

pub fn normalize_and_associate(members: &[ObjectiveVector], refs: &ReferencePointSet) -> Vec<Association> {
    let raw: Vec<[f64; 3]> = members.iter().map(|o| o.to_f64()).collect();
    associate(&normalize(&raw), refs)
}

/// Bookkeeping of one selection step.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SelectionTrace {
    pub fronts: Vec<Vec<usize>>,
    /// Index into `fronts` of the front that was split, if any.
    pub split_front: Option<usize>,
    /// Members of S_t (all fronts up to and including the split one).
    pub candidates: Vec<usize>,
    /// Association of each member of `candidates`, in the same order.
    pub associations: Vec<Association>,
    /// Niche counts after niching, maintained incrementally.
    pub niche_counts: Vec<usize>,
}

/// Chooses `n_pop` survivors from `objectives`.
pub fn environmental_selection<R: Rng + ?Sized>(
    objectives: &[ObjectiveVector],
    n_pop: usize,
    refs: &ReferencePointSet,
    rng: &mut R,
) -> (Vec<usize>, SelectionTrace) {
    let fronts = fast_nondominated_sort(objectives);
    let mut selected = Vec::with_capacity(n_pop);
    let mut trace = SelectionTrace::default();
    let mut last = None;
    for (l, front) in fronts.iter().enumerate() {
        if selected.len() + front.len() <= n_pop {
            selected.extend_from_slice(front);
            if selected.len() == n_pop {
                break;
            }
        } else {
            last = Some(l);
            break;
        }
    }
    let Some(l) = last else {
        trace.fronts = fronts;
        return (selected, trace);
    };

    let candidates: Vec<usize> = fronts[..=l].iter().flatten().copied().collect();
    let member_objs: Vec<ObjectiveVector> = candidates.iter().map(|&i| objectives[i]).collect();
    let associations = normalize_and_associate(&member_objs, refs);
    let mut counts = vec![0usize; refs.points.len()];
    let accepted_len = selected.len();
    for a in &associations[..accepted_len] {
        counts[a.reference] += 1;
    }
    // Remaining members of the split front, grouped per reference point.
    let mut pool: Vec<Vec<(usize, f64)>> = vec![Vec::new(); refs.points.len()];
    for (pos, a) in associations.iter().enumerate().skip(accepted_len) {
        pool[a.reference].push((candidates[pos], a.distance));
    }
    let mut active: Vec<bool> = pool.iter().map(|p| !p.is_empty()).collect();
    while selected.len() < n_pop {
        let min = (0..counts.len())
            .filter(|&j| active[j])
            .map(|j| counts[j])
            .min()
            .expect("split front still has members");
        let ties: Vec<usize> = (0..counts.len()).filter(|&j| active[j] && counts[j] == min).collect();
        let j = *ties.choose(rng).expect("non-empty");
        let pick = if counts[j] == 0 {
            (0..pool[j].len())
                .min_by(|&a, &b| pool[j][a].1.total_cmp(&pool[j][b].1))
                .expect("active niche")
        } else {
            rng.random_range(0..pool[j].len())
        };
        let (member, _) = pool[j].remove(pick);
        selected.push(member);
        counts[j] += 1;
        if pool[j].is_empty() {
            active[j] = false;
        }
    }
    trace.fronts = fronts;
    trace.split_front = Some(l);
    trace.candidates = candidates;
    trace.associations = associations;
    trace.niche_counts = counts;
    (selected, trace)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub population_size: usize,
    pub evaluation_budget: usize,
    pub divisions: usize,
    pub variation: VariationConfig,
    pub init: InitConfig,
    pub level2_probability: f64,
    pub seed: u64,
    /// Evaluate and breed on the rayon pool. Results do not depend on it.
    #[serde(skip)]
    pub parallel: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            population_size: 100,
            evaluation_budget: 150_000,
            divisions: 12,
            variation: VariationConfig::default(),
            init: InitConfig::default(),
            level2_probability: LEVEL2_PROBABILITY,
            seed: 0,
            parallel: false,
        }
    }
}

impl RunConfig {
    /// Budget used for the small Kacem instances.
    pub const KACEM_BUDGET: usize = 10_000;
    /// Budget used for the Brandimarte instances.
    pub const BRDATA_BUDGET: usize = 150_000;

    pub fn validate(&self) -> Result<(), RunError> {
        if self.population_size < 2 {
            return Err(RunError::PopulationTooSmall(self.population_size));
        }
        if self.evaluation_budget < self.population_size {
            return Err(RunError::BudgetTooSmall {
                budget: self.evaluation_budget,
                population: self.population_size,
            });
        }
        if self.divisions == 0 {
            return Err(RunError::NoDivisions);
        }
        if !(0.0..=1.0).contains(&self.level2_probability) {
            return Err(RunError::Level2Probability(self.level2_probability));
        }
        self.variation.validate()?;
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("population size {0} is below 2")]
    PopulationTooSmall(usize),
    #[error("evaluation budget {budget} is smaller than the population size {population}")]
    BudgetTooSmall { budget: usize, population: usize },
    #[error("reference points need at least one division")]
    NoDivisions,
    #[error("level-2 probability {0} is not in [0, 1]")]
    Level2Probability(f64),
    #[error(transparent)]
    Variation(#[from] ConfigError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationLog {
    pub generation: usize,
    pub evaluations: usize,
    pub front_size: usize,
    pub hypervolume: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Level2Counts {
    pub fired: usize,
    pub accepted: usize,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    /// Non-dominated members of the final population.
    pub front: Vec<Individual>,
    pub evaluations: usize,
    pub generations: usize,
    /// Fixed reference used for the per-generation hypervolume.
    pub hv_reference: HvReference,
    pub history: Vec<GenerationLog>,
    pub level2: Level2Counts,
}

pub fn run(instance: &FjspInstance, config: &RunConfig) -> Result<RunResult, RunError> {
    run_observed(instance, config, |_, _| {})
}

/// Like [`run`], calling `observer` after the initial population and after
/// every generation with the log line and the current population.
pub fn run_observed<F>(instance: &FjspInstance, config: &RunConfig, mut observer: F) -> Result<RunResult, RunError>
where
    F: FnMut(&GenerationLog, &[Individual]),
{
    config.validate()?;
    let refs = das_dennis(config.divisions);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut level2 = Level2Counts::default();

    let initial = generate_population(config.population_size, instance, config.init, &mut rng);
    let seeds: Vec<u64> = initial.iter().map(|_| rng.random()).collect();
    let jobs: Vec<(Chromosome, u64)> = initial.into_iter().zip(seeds).collect();
    let evaluated = map_maybe_parallel(config.parallel, jobs, |(c, seed)| {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        vec![evaluate_one(&c, instance, config.level2_probability, &mut r)]
    });
    let mut population = absorb(evaluated, &mut level2);
    let mut evaluations = population.len();

    let all: Vec<ObjectiveVector> = population.iter().map(|i| i.objectives).collect();
    let hv_reference = reference_from_points(&all).expect("population is non-empty");
    let mut history = Vec::new();
    let mut generation = 0;
    let mut log_generation = |generation: usize, evaluations: usize, population: &[Individual]| {
        let objs: Vec<ObjectiveVector> = population.iter().map(|i| i.objectives).collect();
        let f1: Vec<ObjectiveVector> = fast_nondominated_sort(&objs)[0].iter().map(|&i| objs[i]).collect();
        let entry = GenerationLog {
            generation,
            evaluations,
            front_size: f1.len(),
            hypervolume: hypervolume3(&f1, &hv_reference),
        };
        log::info!(
            "generation {} evaluations {} |F1| {} hv {:.6}",
            entry.generation,
            entry.evaluations,
            entry.front_size,
            entry.hypervolume
        );
        observer(&entry, population);
        history.push(entry);
    };
    log_generation(generation, evaluations, &population);

    while evaluations < config.evaluation_budget {
        let offspring_count = config.population_size.min(config.evaluation_budget - evaluations);
        let pairs = offspring_count.div_ceil(2);
        let n = population.len();
        let matings: Vec<(usize, usize, usize, u64)> = (0..pairs)
            .map(|k| {
                let a = rng.random_range(0..n);
                let b = rng.random_range(0..n);
                let keep = (offspring_count - 2 * k).min(2);
                (a, b, keep, rng.random())
            })
            .collect();
        let pop_ref = &population;
        let children = map_maybe_parallel(config.parallel, matings, |(a, b, keep, seed)| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            let (c1, c2) = make_offspring(
                &pop_ref[a].chromosome,
                &pop_ref[b].chromosome,
                instance,
                &config.variation,
                &mut r,
            );
            [c1, c2]
                .iter()
                .take(keep)
                .map(|c| evaluate_one(c, instance, config.level2_probability, &mut r))
                .collect()
        });
        let offspring = absorb(children, &mut level2);
        evaluations += offspring.len();
        population.extend(offspring);

        let objs: Vec<ObjectiveVector> = population.iter().map(|i| i.objectives).collect();
        let (survivors, _) = environmental_selection(&objs, config.population_size, &refs, &mut rng);
        let mut slots: Vec<Option<Individual>> = population.into_iter().map(Some).collect();
        population = survivors
            .into_iter()
            .map(|i| slots[i].take().expect("selected once"))
            .collect();
        generation += 1;
        log_generation(generation, evaluations, &population);
    }

    let objs: Vec<ObjectiveVector> = population.iter().map(|i| i.objectives).collect();
    let first = fast_nondominated_sort(&objs).swap_remove(0);
    let front = first.into_iter().map(|i| population[i].clone()).collect();
    Ok(RunResult {
        front,
        evaluations,
        generations: generation,
        hv_reference,
        history,
        level2,
    })
}

fn evaluate_one(
    c: &Chromosome,
    instance: &FjspInstance,
    p_level2: f64,
    rng: &mut ChaCha8Rng,
) -> (Individual, Level2Status) {
    let e = evaluate_with(c, instance, p_level2, rng);
    (
        Individual {
            objectives: e.objectives(),
            chromosome: e.decoded.chromosome,
        },
        e.level2,
    )
}

fn absorb(batches: Vec<Vec<(Individual, Level2Status)>>, counts: &mut Level2Counts) -> Vec<Individual> {
    batches
        .into_iter()
        .flatten()
        .map(|(ind, status)| {
            match status {
                Level2Status::NotFired => {}
                Level2Status::Rejected => counts.fired += 1,
                Level2Status::Accepted => {
                    counts.fired += 1;
                    counts.accepted += 1;
                }
            }
            ind
        })
        .collect()
}

fn map_maybe_parallel<T, U, F>(parallel: bool, items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    if parallel {
        items.into_par_iter().map(f).collect()
    } else {
        items.into_iter().map(f).collect()
    }
}
