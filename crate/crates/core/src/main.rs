use std::fs::File;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use fjsp_core::experiment::{
    benchmark_scale, run_campaign, tune_mutation, write_report, write_tune_report, Campaign, TuneSpec,
};
use fjsp_core::initializer::{InitConfig, MaInit, OsInit};
use fjsp_core::instance::FjspInstance;
use fjsp_core::metrics::{hypervolume3, reference_point, Front};
use fjsp_core::moea::RunConfig;
use fjsp_core::synth::{synthesize, SynthSpec};
use fjsp_core::variation::{MaCrossover, OsCrossover, VariationConfig};

#[derive(Parser)]
#[command(name = "fjsp", version, about = "Multi-objective flexible job-shop scheduling with NSGA-III")]
struct Cli {
    /// Log per-generation progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a multi-run campaign and report the merged front.
    Solve {
        instance: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Independent runs.
        #[arg(long, default_value_t = 1)]
        runs: usize,
    },
    /// Search the mutation-probability grid for the best hypervolume.
    Tune {
        instance: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Distinct configurations to evaluate.
        #[arg(long, default_value_t = 200)]
        budget: usize,
        /// Runs per configuration.
        #[arg(long, default_value_t = 3)]
        inner_runs: usize,
    },
    /// Hypervolume of a front CSV against a reference front.
    Hv {
        front: PathBuf,
        #[arg(long)]
        ref_front: PathBuf,
        /// Measure in raw objective units instead of the normalised cube.
        #[arg(long)]
        raw: bool,
    },
    /// Print a seeded random instance in .fjs format.
    Synth {
        /// Copy the dimensions of a named benchmark (e.g. Mk01, ka4x5).
        #[arg(long, conflicts_with_all = ["jobs", "machines", "ops", "flex"])]
        like: Option<String>,
        #[arg(long, required_unless_present = "like")]
        jobs: Option<usize>,
        #[arg(long, required_unless_present = "like")]
        machines: Option<usize>,
        #[arg(long, required_unless_present = "like")]
        ops: Option<usize>,
        #[arg(long, required_unless_present = "like")]
        flex: Option<f64>,
        #[arg(long, default_value_t = 10)]
        max_duration: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value_t = 100)]
    pop: usize,
    /// Evaluation budget per run.
    #[arg(long, default_value_t = RunConfig::BRDATA_BUDGET)]
    evals: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.6)]
    p_insert: f64,
    #[arg(long, default_value_t = 0.6)]
    p_swap1: f64,
    #[arg(long, default_value_t = 0.6)]
    p_swap2: f64,
    /// Reference-point lattice divisions.
    #[arg(long, default_value_t = 12)]
    divisions: usize,
    /// Pin the machine-assignment crossover (none, onepoint, twopoint, jx, mpx).
    #[arg(long)]
    xover_ma: Option<MaCrossover>,
    /// Pin the sequence crossover (none, ppop, pptp, ipox, upx).
    #[arg(long)]
    xover_os: Option<OsCrossover>,
    /// Pin the machine-assignment initialiser (random, prw, wrw).
    #[arg(long)]
    ma_init: Option<MaInit>,
    /// Pin the sequence initialiser (random, mwr, mor, lpt, mrmo, mrmw).
    #[arg(long)]
    os_init: Option<OsInit>,
    #[arg(long, default_value_t = fjsp_core::decoder::LEVEL2_PROBABILITY)]
    level2_prob: f64,
    /// Front CSV that defines the hypervolume reference point.
    #[arg(long)]
    ref_front: Option<PathBuf>,
    /// Use all cores. Output is identical to a serial run.
    #[arg(long)]
    parallel: bool,
    /// Directory for the report files.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn config(&self) -> RunConfig {
        RunConfig {
            population_size: self.pop,
            evaluation_budget: self.evals,
            divisions: self.divisions,
            variation: VariationConfig {
                ma_crossover: self.xover_ma,
                os_crossover: self.xover_os,
                ..VariationConfig::with_mutation(self.p_insert, self.p_swap1, self.p_swap2)
            },
            init: InitConfig {
                ma: self.ma_init,
                os: self.os_init,
            },
            level2_probability: self.level2_prob,
            seed: self.seed,
            parallel: false,
        }
    }

    fn campaign(&self, runs: usize) -> Result<Campaign> {
        let mut c = Campaign::new(self.config(), runs, self.seed);
        c.parallel = self.parallel;
        if let Some(path) = &self.ref_front {
            c.reference_front = Some(read_front(path)?);
        }
        Ok(c)
    }
}

fn read_front(path: &Path) -> Result<Front> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Front::read_csv(file).with_context(|| format!("reading {}", path.display()))
}

fn load(path: &Path) -> Result<(FjspInstance, String)> {
    let inst = FjspInstance::from_file(path).with_context(|| format!("loading {}", path.display()))?;
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("instance")
        .to_string();
    Ok((inst, name))
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match cli.command {
        Cmd::Solve { instance, run, runs } => {
            let (inst, name) = load(&instance)?;
            let report = run_campaign(&inst, &name, &run.campaign(runs)?)?;
            eprintln!(
                "{name}: {} runs, {} front points, hypervolume {:.6}, {:.2?}",
                report.runs,
                report.front.len(),
                report.hypervolume,
                report.wall_time
            );
            match &run.out {
                Some(dir) => write_report(&report, dir)?,
                None => print!("{}", report.merged_front().to_csv()),
            }
        }
        Cmd::Tune {
            instance,
            run,
            budget,
            inner_runs,
        } => {
            let (inst, name) = load(&instance)?;
            let spec = TuneSpec {
                budget,
                inner_runs,
                inner_evaluations: Some(run.evals),
                seed: run.seed,
            };
            let report = tune_mutation(&inst, &name, &run.campaign(inner_runs)?, &spec)?;
            let [a, b, c] = report.best_probabilities;
            eprintln!(
                "{name}: best p_insert={a} p_swap1={b} p_swap2={c}, hypervolume {:.6}, reached by {:.1}% of {} configurations, {:.2?}",
                report.best_hypervolume,
                100.0 * report.fraction_best,
                report.entries.len(),
                report.wall_time
            );
            match &run.out {
                Some(dir) => write_tune_report(&report, dir)?,
                None => println!("{}", serde_json::to_string_pretty(&report)?),
            }
        }
        Cmd::Hv { front, ref_front, raw } => {
            let front = read_front(&front)?;
            let reference = reference_point(&read_front(&ref_front)?)?;
            let reference = if raw { reference.raw() } else { reference };
            let [r1, r2, r3] = reference.point;
            println!("{:.12}", hypervolume3(front.points(), &reference));
            eprintln!("reference point ({r1}, {r2}, {r3}), {} points", front.len());
        }
        Cmd::Synth {
            like,
            jobs,
            machines,
            ops,
            flex,
            max_duration,
            seed,
            out,
        } => {
            let mut spec = match like {
                Some(name) => match benchmark_scale(&name) {
                    Some(s) => SynthSpec::from_scale(s),
                    None => bail!("unknown benchmark `{name}`"),
                },
                None => SynthSpec {
                    jobs: jobs.unwrap_or_default(),
                    machines: machines.unwrap_or_default(),
                    operations: ops.unwrap_or_default(),
                    flexibility: flex.unwrap_or(1.0),
                    min_duration: 1,
                    max_duration,
                },
            };
            spec.max_duration = max_duration;
            if spec.jobs == 0 || spec.machines == 0 || spec.operations < spec.jobs || max_duration == 0 {
                bail!("need jobs >= 1, machines >= 1, ops >= jobs and max-duration >= 1");
            }
            let text = synthesize(&spec, seed).to_fjs();
            match out {
                Some(path) => std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?,
                None => print!("{text}"),
            }
        }
    }
    Ok(())
}
