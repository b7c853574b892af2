//! Multi-run campaigns, merged-front reports and mutation-probability tuning.

use std::fs;
use std::io;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decoder::{decode_level1, ObjectiveVector, ScheduleRow};
use crate::genome::ChromosomeRecord;
use crate::instance::FjspInstance;
use crate::metrics::{hypervolume3, merge_runs, nd_filter, reference_point, Front, HvReference, MetricsError};
use crate::moea::{run, Individual, Level2Counts, RunConfig, RunError};
use crate::variation::VariationConfig;

/// Number of points of the one-decimal mutation-probability grid.
pub const GRID_SIZE: usize = 11 * 11 * 11;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Run(#[from] RunError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("a campaign needs at least one run")]
    NoRuns,
    #[error("tuning budget {0} is outside 1..={GRID_SIZE}")]
    TuneBudget(usize),
    #[error("witness for {expected} re-decodes to {found}")]
    Witness {
        expected: ObjectiveVector,
        found: ObjectiveVector,
    },
    #[error("writing report: {0}")]
    Io(#[from] io::Error),
    #[error("serialising report: {0}")]
    Json(#[from] serde_json::Error),
}

/// Published instance dimensions: jobs, machines, operations and flexibility.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BenchmarkScale {
    pub name: &'static str,
    pub jobs: usize,
    pub machines: usize,
    pub operations: usize,
    pub flexibility: f64,
}

const fn scale(name: &'static str, jobs: usize, machines: usize, operations: usize, flexibility: f64) -> BenchmarkScale {
    BenchmarkScale {
        name,
        jobs,
        machines,
        operations,
        flexibility,
    }
}

pub const BENCHMARK_SCALES: [BenchmarkScale; 14] = [
    scale("ka4x5", 4, 5, 12, 5.0),
    scale("ka10x7", 10, 7, 29, 7.0),
    scale("ka10x10", 10, 10, 30, 10.0),
    scale("ka15x10", 15, 10, 56, 10.0),
    scale("Mk01", 10, 6, 55, 2.0),
    scale("Mk02", 10, 6, 58, 3.5),
    scale("Mk03", 15, 8, 150, 3.0),
    scale("Mk04", 15, 8, 90, 2.0),
    scale("Mk05", 15, 4, 106, 1.5),
    scale("Mk06", 10, 15, 150, 3.0),
    scale("Mk07", 20, 5, 100, 3.0),
    scale("Mk08", 20, 10, 225, 1.5),
    scale("Mk09", 20, 10, 240, 3.0),
    scale("Mk10", 20, 15, 240, 3.0),
];

pub fn benchmark_scale(name: &str) -> Option<&'static BenchmarkScale> {
    BENCHMARK_SCALES.iter().find(|s| s.name.eq_ignore_ascii_case(name))
}

/// Looks for `<name>.fjs` (any case) in `dir`.
pub fn find_benchmark(dir: &Path, name: &str) -> Option<std::path::PathBuf> {
    let entries = fs::read_dir(dir).ok()?;
    let mut hits: Vec<_> = entries
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| {
            p.file_stem().and_then(|s| s.to_str()).is_some_and(|s| s.eq_ignore_ascii_case(name))
                && p.extension().and_then(|s| s.to_str()).is_some_and(|s| s.eq_ignore_ascii_case("fjs"))
        })
        .collect();
    hits.sort();
    hits.into_iter().next()
}

/// Settings of a multi-run experiment. The template's seed is replaced per run.
#[derive(Debug, Clone)]
pub struct Campaign {
    pub runs: usize,
    pub master_seed: u64,
    pub template: RunConfig,
    /// Run the independent runs on the rayon pool.
    pub parallel: bool,
    /// Front defining the hypervolume reference; the merged front otherwise.
    pub reference_front: Option<Front>,
}

impl Campaign {
    pub fn new(template: RunConfig, runs: usize, master_seed: u64) -> Self {
        Self {
            runs,
            master_seed,
            template,
            parallel: false,
            reference_front: None,
        }
    }

    /// Kacem protocol: population 100, 10,000 evaluations, all mutation probabilities 0.6.
    pub fn kacem(runs: usize, master_seed: u64) -> Self {
        Self::new(
            RunConfig {
                evaluation_budget: RunConfig::KACEM_BUDGET,
                variation: VariationConfig::with_mutation(0.6, 0.6, 0.6),
                ..RunConfig::default()
            },
            runs,
            master_seed,
        )
    }

    /// Brandimarte protocol: population 100, 150,000 evaluations.
    pub fn brdata(runs: usize, master_seed: u64) -> Self {
        Self::new(
            RunConfig {
                evaluation_budget: RunConfig::BRDATA_BUDGET,
                ..RunConfig::default()
            },
            runs,
            master_seed,
        )
    }
}

/// Pairwise distinct run seeds derived from `master`.
pub fn run_seeds(master: u64, runs: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    let mut seeds = Vec::with_capacity(runs);
    while seeds.len() < runs {
        let s: u64 = rng.random();
        if !seeds.contains(&s) {
            seeds.push(s);
        }
    }
    seeds
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontEntry {
    pub f1: u64,
    pub f2: u64,
    pub f3: u64,
    /// Run that produced the witness.
    pub run: usize,
    pub chromosome: ChromosomeRecord,
    pub schedule: Vec<ScheduleRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub seed: u64,
    pub evaluations: usize,
    pub generations: usize,
    pub hypervolume: f64,
    pub level2: Level2Counts,
    pub front: Front,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignReport {
    pub instance: String,
    pub master_seed: u64,
    pub runs: usize,
    pub config: RunConfig,
    pub hv_reference: HvReference,
    pub hypervolume: f64,
    pub front: Vec<FrontEntry>,
    pub per_run: Vec<RunSummary>,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl CampaignReport {
    pub fn merged_front(&self) -> Front {
        nd_filter(
            self.front
                .iter()
                .map(|e| ObjectiveVector::new(e.f1, e.f2, e.f3)),
        )
    }
}

pub fn run_campaign(instance: &FjspInstance, name: &str, campaign: &Campaign) -> Result<CampaignReport, ExperimentError> {
    if campaign.runs == 0 {
        return Err(ExperimentError::NoRuns);
    }
    campaign.template.validate()?;
    let started = Instant::now();
    let seeds = run_seeds(campaign.master_seed, campaign.runs);
    let one = |seed: u64| {
        let cfg = RunConfig {
            seed,
            ..campaign.template
        };
        run(instance, &cfg)
    };
    let results = if campaign.parallel {
        seeds.par_iter().map(|&s| one(s)).collect::<Result<Vec<_>, _>>()?
    } else {
        seeds.iter().map(|&s| one(s)).collect::<Result<Vec<_>, _>>()?
    };

    let run_fronts: Vec<Front> = results
        .iter()
        .map(|r| nd_filter(r.front.iter().map(|i| i.objectives)))
        .collect();
    let merged = merge_runs(&run_fronts);
    let hv_reference = match &campaign.reference_front {
        Some(f) => reference_point(f)?,
        None => reference_point(&merged)?,
    };

    let mut front = Vec::with_capacity(merged.len());
    for target in merged.points() {
        let (run, witness) = results
            .iter()
            .enumerate()
            .find_map(|(k, r)| r.front.iter().find(|i| i.objectives == *target).map(|i| (k, i)))
            .expect("merged points come from some run");
        front.push(witness_entry(instance, run, witness)?);
    }

    let per_run = results
        .iter()
        .zip(&seeds)
        .zip(run_fronts)
        .map(|((r, &seed), f)| RunSummary {
            seed,
            evaluations: r.evaluations,
            generations: r.generations,
            hypervolume: hypervolume3(f.points(), &hv_reference),
            level2: r.level2,
            front: f,
        })
        .collect();

    Ok(CampaignReport {
        instance: name.to_string(),
        master_seed: campaign.master_seed,
        runs: campaign.runs,
        config: RunConfig {
            seed: campaign.master_seed,
            ..campaign.template
        },
        hv_reference,
        hypervolume: hypervolume3(merged.points(), &hv_reference),
        front,
        per_run,
        wall_time: started.elapsed(),
    })
}

fn witness_entry(instance: &FjspInstance, run: usize, ind: &Individual) -> Result<FrontEntry, ExperimentError> {
    let decoded = decode_level1(&ind.chromosome, instance);
    if decoded.objectives != ind.objectives {
        return Err(ExperimentError::Witness {
            expected: ind.objectives,
            found: decoded.objectives,
        });
    }
    let o = ind.objectives;
    Ok(FrontEntry {
        f1: o.makespan,
        f2: o.total_workload,
        f3: o.critical_workload,
        run,
        chromosome: ind.chromosome.to_record(),
        schedule: decoded.schedule.rows(),
    })
}

/// Writes `report.json` and `front.csv` into `dir`.
pub fn write_report(report: &CampaignReport, dir: &Path) -> Result<(), ExperimentError> {
    fs::create_dir_all(dir)?;
    write_json(report, &dir.join("report.json"))?;
    fs::write(dir.join("front.csv"), report.merged_front().to_csv())?;
    Ok(())
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<(), ExperimentError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Mutation probabilities of grid point `k` (insert-major order).
pub fn grid_point(k: usize) -> [f64; 3] {
    [k / 121, (k / 11) % 11, k % 11].map(|d| d as f64 / 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuneSpec {
    /// Number of distinct configurations evaluated.
    pub budget: usize,
    /// Runs per configuration.
    pub inner_runs: usize,
    /// Overrides the template's evaluation budget for inner runs.
    pub inner_evaluations: Option<usize>,
    pub seed: u64,
}

impl Default for TuneSpec {
    fn default() -> Self {
        Self {
            budget: 200,
            inner_runs: 3,
            inner_evaluations: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TuneEntry {
    pub grid_index: usize,
    pub p_insert: f64,
    pub p_swap1: f64,
    pub p_swap2: f64,
    pub hypervolume: f64,
    pub front: Front,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TuneReport {
    pub instance: String,
    pub spec: TuneSpec,
    pub config: RunConfig,
    /// Derived from the union of all configurations' merged fronts.
    pub hv_reference: HvReference,
    /// Entries in sampling order.
    pub entries: Vec<TuneEntry>,
    pub best: usize,
    pub best_probabilities: [f64; 3],
    pub best_hypervolume: f64,
    /// Share of evaluated configurations reaching the best hypervolume.
    pub fraction_best: f64,
    #[serde(skip)]
    pub wall_time: Duration,
}

/// Samples `spec.budget` distinct grid configurations and scores each by the
/// merged-front hypervolume of an inner campaign. Ties keep the first sampled.
pub fn tune_mutation(
    instance: &FjspInstance,
    name: &str,
    template: &Campaign,
    spec: &TuneSpec,
) -> Result<TuneReport, ExperimentError> {
    if spec.budget == 0 || spec.budget > GRID_SIZE {
        return Err(ExperimentError::TuneBudget(spec.budget));
    }
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let picks: Vec<usize> = sample(&mut rng, GRID_SIZE, spec.budget).into_vec();
    let base = RunConfig {
        evaluation_budget: spec.inner_evaluations.unwrap_or(template.template.evaluation_budget),
        ..template.template
    };
    let inner = |k: usize| -> Result<Front, ExperimentError> {
        let [a, b, c] = grid_point(k);
        let cfg = RunConfig {
            variation: VariationConfig {
                p_insert: a,
                p_swap1: b,
                p_swap2: c,
                ..base.variation
            },
            ..base
        };
        let campaign = Campaign {
            runs: spec.inner_runs,
            master_seed: spec.seed,
            template: cfg,
            parallel: false,
            reference_front: None,
        };
        Ok(run_campaign(instance, name, &campaign)?.merged_front())
    };
    let fronts: Vec<Front> = if template.parallel {
        picks.par_iter().map(|&k| inner(k)).collect::<Result<_, _>>()?
    } else {
        picks.iter().map(|&k| inner(k)).collect::<Result<_, _>>()?
    };

    let hv_reference = match &template.reference_front {
        Some(f) => reference_point(f)?,
        None => reference_point(&merge_runs(&fronts))?,
    };
    let entries: Vec<TuneEntry> = picks
        .iter()
        .zip(fronts)
        .map(|(&k, front)| {
            let [a, b, c] = grid_point(k);
            TuneEntry {
                grid_index: k,
                p_insert: a,
                p_swap1: b,
                p_swap2: c,
                hypervolume: hypervolume3(front.points(), &hv_reference),
                front,
            }
        })
        .collect();
    let mut best = 0;
    for (i, e) in entries.iter().enumerate() {
        if e.hypervolume > entries[best].hypervolume {
            best = i;
        }
    }
    let best_hv = entries[best].hypervolume;
    let reaching = entries.iter().filter(|e| e.hypervolume == best_hv).count();
    Ok(TuneReport {
        instance: name.to_string(),
        spec: *spec,
        config: base,
        hv_reference,
        best,
        best_probabilities: [entries[best].p_insert, entries[best].p_swap1, entries[best].p_swap2],
        best_hypervolume: best_hv,
        fraction_best: reaching as f64 / entries.len() as f64,
        entries,
        wall_time: started.elapsed(),
    })
}

/// Writes `tune.json` into `dir`.
pub fn write_tune_report(report: &TuneReport, dir: &Path) -> Result<(), ExperimentError> {
    fs::create_dir_all(dir)?;
    write_json(report, &dir.join("tune.json"))
}
