//! Acceptance suite. Prints one PASS/FAIL line per criterion.
//!
//! Criteria that need benchmark files fall back to seeded stand-ins with the
//! same dimensions where the check is about behaviour, and report FAIL
//! (missing data) where the check is about the files themselves. Missing-data
//! failures only change the exit status when `FJSP_ACCEPTANCE_STRICT` is set.

use std::collections::BTreeSet;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use fjsp_core::decoder::{evaluate, evaluate_forced, Level2Status, ObjectiveVector};
use fjsp_core::experiment::{find_benchmark, BENCHMARK_SCALES};
use fjsp_core::genome::Chromosome;
use fjsp_core::initializer::{init_ma, init_os, MaInit, OsInit};
use fjsp_core::instance::{parse_fjs, FjspInstance};
use fjsp_core::metrics::{dominates, hypervolume3, hypervolume3_raw, nd_filter, HvReference, REFERENCE_SCALE};
use fjsp_core::moea::{das_dennis, environmental_selection, fast_nondominated_sort, normalize_and_associate, run, RunConfig};
use fjsp_core::synth::{synthesize, SynthSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const TOY: &str = "3 3 2.29\n\
    3 2 1 3 3 2 3 1 5 2 7 3 6 1 3 2\n\
    2 3 1 2 2 4 3 3 2 1 2 3 1\n\
    2 3 1 4 2 2 3 2 2 1 3 2 5\n";

enum Failure {
    Broken(String),
    MissingData(String),
}

type Check = Result<String, Failure>;

fn broken<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Broken(msg.into()))
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), Failure> {
    if cond {
        Ok(())
    } else {
        Err(Failure::Broken(msg()))
    }
}

// ------------------------------------------------------------------
// Shared helpers and oracles
// ------------------------------------------------------------------

fn toy() -> FjspInstance {
    parse_fjs(TOY).unwrap()
}

fn benchmark_dir() -> PathBuf {
    std::env::var_os("FJSP_BENCHMARK_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../../benchmarks"))
}

/// Real benchmark if present, otherwise a seeded instance of the same size.
fn benchmark_or_standin(name: &str) -> (FjspInstance, bool) {
    if let Some(path) = find_benchmark(&benchmark_dir(), name) {
        if let Ok(inst) = FjspInstance::from_file(&path) {
            return (inst, true);
        }
    }
    let scale = BENCHMARK_SCALES.iter().find(|s| s.name == name).unwrap();
    (synthesize(&SynthSpec::from_scale(scale), 0xF15), false)
}

fn random_chromosome(inst: &FjspInstance, rng: &mut ChaCha8Rng) -> Chromosome {
    let ma = init_ma(MaInit::Random, inst, rng);
    let os = init_os(OsInit::Random, &ma, inst, rng);
    Chromosome { os, ma }
}

fn brute_dominates(a: &[u64; 3], b: &[u64; 3]) -> bool {
    (0..3).all(|k| a[k] <= b[k]) && (0..3).any(|k| a[k] < b[k])
}

/// Pareto set of the toy instance by exhaustive enumeration.
///
/// For every machine assignment all sequences are decoded append-only
/// (each operation starts at max(machine free, job ready)). That schedule
/// class contains every active schedule, so the least makespan per
/// assignment is exact; workloads depend on the assignment alone.
fn toy_pareto_oracle(inst: &FjspInstance) -> BTreeSet<[u64; 3]> {
    let n_ops = inst.total_operations();
    let counts: Vec<usize> = (0..n_ops).map(|f| inst.operation(f).alternatives.len()).collect();
    let mut sequences = Vec::new();
    let mut remaining: Vec<usize> = (0..inst.num_jobs()).map(|j| inst.job_len(j)).collect();
    permutations(&mut remaining, &mut Vec::new(), n_ops, &mut sequences);

    let mut ma = vec![0usize; n_ops];
    let mut vectors = Vec::new();
    loop {
        let mut workload = vec![0u64; inst.num_machines()];
        for (f, &alt) in ma.iter().enumerate() {
            let a = inst.operation(f).alternatives[alt];
            workload[a.machine] += a.duration;
        }
        let mut best = u64::MAX;
        for seq in &sequences {
            let mut machine_free = vec![0u64; inst.num_machines()];
            let mut job_ready = vec![0u64; inst.num_jobs()];
            let mut next = vec![0usize; inst.num_jobs()];
            let mut makespan = 0;
            for &j in seq {
                let f = inst.job_offset(j) + next[j];
                next[j] += 1;
                let a = inst.operation(f).alternatives[ma[f]];
                let end = machine_free[a.machine].max(job_ready[j]) + a.duration;
                machine_free[a.machine] = end;
                job_ready[j] = end;
                makespan = makespan.max(end);
            }
            best = best.min(makespan);
        }
        vectors.push([best, workload.iter().sum(), *workload.iter().max().unwrap()]);
        // odometer over alternative indices
        let mut k = 0;
        while k < n_ops {
            ma[k] += 1;
            if ma[k] < counts[k] {
                break;
            }
            ma[k] = 0;
            k += 1;
        }
        if k == n_ops {
            break;
        }
    }
    vectors
        .iter()
        .filter(|v| !vectors.iter().any(|w| brute_dominates(w, v)))
        .copied()
        .collect()
}

fn permutations(remaining: &mut [usize], prefix: &mut Vec<usize>, len: usize, out: &mut Vec<Vec<usize>>) {
    if prefix.len() == len {
        out.push(prefix.clone());
        return;
    }
    for j in 0..remaining.len() {
        if remaining[j] > 0 {
            remaining[j] -= 1;
            prefix.push(j);
            permutations(remaining, prefix, len, out);
            prefix.pop();
            remaining[j] += 1;
        }
    }
}

/// Layers by repeated O(n^2) peeling.
fn brute_fronts(objs: &[ObjectiveVector]) -> Vec<Vec<usize>> {
    let arr: Vec<[u64; 3]> = objs.iter().map(|o| o.to_array()).collect();
    let mut left: Vec<usize> = (0..objs.len()).collect();
    let mut fronts = Vec::new();
    while !left.is_empty() {
        let front: Vec<usize> = left
            .iter()
            .copied()
            .filter(|&i| !left.iter().any(|&j| brute_dominates(&arr[j], &arr[i])))
            .collect();
        left.retain(|i| !front.contains(i));
        fronts.push(front);
    }
    fronts
}

/// Union volume of boxes [p, ref] by inclusion-exclusion over all subsets.
fn hv_inclusion_exclusion(points: &[[f64; 3]], reference: [f64; 3]) -> f64 {
    let n = points.len();
    let mut total = 0.0;
    for mask in 1u32..(1 << n) {
        let mut corner = [f64::NEG_INFINITY; 3];
        for (i, p) in points.iter().enumerate() {
            if mask & (1 << i) != 0 {
                for k in 0..3 {
                    corner[k] = corner[k].max(p[k]);
                }
            }
        }
        let vol: f64 = (0..3).map(|k| (reference[k] - corner[k]).max(0.0)).product();
        if mask.count_ones() % 2 == 1 {
            total += vol;
        } else {
            total -= vol;
        }
    }
    total
}

// ------------------------------------------------------------------
// Criteria
// ------------------------------------------------------------------

fn criterion_1() -> Check {
    let started = Instant::now();
    let inst = toy();
    let oracle = toy_pareto_oracle(&inst);
    let mut detail = Vec::new();
    for seed in 0..5u64 {
        let cfg = RunConfig {
            population_size: 20,
            evaluation_budget: 2_000,
            seed,
            ..RunConfig::default()
        };
        let result = run(&inst, &cfg).map_err(|e| Failure::Broken(e.to_string()))?;
        let got: BTreeSet<[u64; 3]> = result.front.iter().map(|i| i.objectives.to_array()).collect();
        ensure(got == oracle, || format!("seed {seed}: front {got:?} != oracle {oracle:?}"))?;
        detail.push(got.len());
    }
    let elapsed = started.elapsed();
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "oracle Pareto set {:?}; 5/5 runs exact; {:.2?}",
        oracle, elapsed
    ))
}

fn criterion_2() -> Check {
    let inst = toy();
    let c = Chromosome {
        os: vec![0, 1, 2, 1, 0, 0, 2],
        ma: vec![1, 0, 0, 2, 1, 1, 0],
    };
    let l1 = evaluate_forced(&c, &inst, false).objectives();
    let l2 = evaluate_forced(&c, &inst, true).objectives();
    ensure(l1.to_array() == [10, 18, 8], || format!("level-1 gave {l1}"))?;
    ensure(l2.to_array() == [9, 20, 8], || format!("level-2 gave {l2}"))?;
    Ok(format!("level-1 {l1}, level-2 {l2}"))
}

fn criterion_3() -> Check {
    let started = Instant::now();
    let names: Vec<&str> = BENCHMARK_SCALES.iter().map(|s| s.name).filter(|n| n.starts_with("Mk")).collect();
    let mut real = 0;
    let outcomes: Vec<Result<(), String>> = names
        .iter()
        .map(|name| benchmark_or_standin(name))
        .inspect(|(_, is_real)| real += usize::from(*is_real))
        .collect::<Vec<_>>()
        .into_par_iter()
        .zip(names.par_iter())
        .map(|((inst, _), name)| {
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            for k in 0..1_000 {
                let c = random_chromosome(&inst, &mut rng);
                for level2 in [false, true] {
                    let e = evaluate_forced(&c, &inst, level2);
                    e.decoded
                        .schedule
                        .check(&inst)
                        .map_err(|v| format!("{name} chromosome {k} (level2 {level2}): {v}"))?;
                }
            }
            Ok(())
        })
        .collect();
    for o in outcomes {
        o.map_err(Failure::Broken)?;
    }
    let elapsed = started.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    let source = if real == names.len() {
        "benchmark files".to_string()
    } else {
        format!("{real} benchmark files, {} same-size stand-ins", names.len() - real)
    };
    Ok(format!("10 x 1000 chromosomes, 0 violations ({source}); {elapsed:.2?}"))
}

fn criterion_4() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut splits = 0;
    for trial in 0..1_000 {
        let n = rng.random_range(1..=50);
        let objs: Vec<ObjectiveVector> = (0..n)
            .map(|_| ObjectiveVector::new(rng.random_range(0..8), rng.random_range(0..8), rng.random_range(0..8)))
            .collect();
        let mut fast = fast_nondominated_sort(&objs);
        let mut brute = brute_fronts(&objs);
        fast.iter_mut().for_each(|f| f.sort_unstable());
        brute.iter_mut().for_each(|f| f.sort_unstable());
        ensure(fast == brute, || format!("trial {trial}: sort mismatch"))?;

        let n_pop = rng.random_range(1..=25);
        let r: Vec<ObjectiveVector> = (0..2 * n_pop)
            .map(|_| ObjectiveVector::new(rng.random_range(0..10), rng.random_range(0..10), rng.random_range(0..10)))
            .collect();
        let refs = das_dennis([1, 2, 4, 12][trial % 4]);
        let (selected, trace) = environmental_selection(&r, n_pop, &refs, &mut rng);
        ensure(selected.len() == n_pop, || format!("trial {trial}: {} selected", selected.len()))?;
        let chosen: BTreeSet<usize> = selected.iter().copied().collect();
        ensure(chosen.len() == n_pop, || format!("trial {trial}: duplicate survivors"))?;
        let fronts = brute_fronts(&r);
        let mut partial = 0;
        let mut seen_partial_or_empty = false;
        for front in &fronts {
            let taken = front.iter().filter(|i| chosen.contains(i)).count();
            if taken == front.len() {
                ensure(!seen_partial_or_empty, || format!("trial {trial}: front accepted after a gap"))?;
            } else {
                if taken > 0 {
                    partial += 1;
                }
                seen_partial_or_empty = true;
            }
        }
        ensure(partial <= 1, || format!("trial {trial}: {partial} fronts split"))?;
        if trace.split_front.is_some() {
            splits += 1;
            let cand_objs: Vec<ObjectiveVector> = trace.candidates.iter().map(|&i| r[i]).collect();
            let fresh = normalize_and_associate(&cand_objs, &refs);
            let mut counts = vec![0usize; refs.points.len()];
            for (pos, &member) in trace.candidates.iter().enumerate() {
                if chosen.contains(&member) {
                    counts[fresh[pos].reference] += 1;
                }
            }
            ensure(counts == trace.niche_counts, || format!("trial {trial}: niche counts differ"))?;
        }
    }
    Ok(format!("1000 populations; sort exact, selection sizes exact, {splits} niching cases consistent"))
}

fn criterion_5() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let unit = [1.0; 3];
    let mut worst: f64 = 0.0;
    for trial in 0..10_000 {
        let n = rng.random_range(1..=4);
        let pts: Vec<[f64; 3]> = (0..n).map(|_| [rng.random(), rng.random(), rng.random()]).collect();
        let exact = hypervolume3_raw(&pts, unit);
        let oracle = hv_inclusion_exclusion(&pts, unit);
        worst = worst.max((exact - oracle).abs());
        ensure((exact - oracle).abs() <= 1e-12, || format!("trial {trial}: {exact} vs {oracle}"))?;
    }
    let samples = 1_000_000usize;
    let mut max_z: f64 = 0.0;
    for trial in 0..100 {
        let n = rng.random_range(1..=10);
        let pts: Vec<[f64; 3]> = (0..n)
            .map(|_| [rng.random_range(0.05..1.0), rng.random_range(0.05..1.0), rng.random_range(0.05..1.0)])
            .collect();
        let exact = hypervolume3_raw(&pts, unit);
        let mut mc = ChaCha8Rng::seed_from_u64(1_000 + trial);
        let hits = (0..samples)
            .filter(|_| {
                let s: [f64; 3] = [mc.random(), mc.random(), mc.random()];
                pts.iter().any(|p| (0..3).all(|k| p[k] <= s[k]))
            })
            .count();
        let p = hits as f64 / samples as f64;
        let se = (p * (1.0 - p) / samples as f64).sqrt().max(1e-12);
        let z = (exact - p).abs() / se;
        max_z = max_z.max(z);
        ensure(z <= 3.0, || format!("front {trial}: exact {exact}, MC {p} ({z:.2} SE)"))?;
    }
    Ok(format!(
        "10000 fronts <= 4 points within {worst:.1e}; 100 fronts <= 10 points within {max_z:.2} SE of 1e6-sample MC"
    ))
}

fn criterion_6() -> Check {
    let (inst, real) = benchmark_or_standin("Mk01");
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let trials = 10_000;
    let mut fired = 0;
    let mut accepted = 0;
    for k in 0..trials {
        let c = random_chromosome(&inst, &mut rng);
        let e = evaluate(&c, &inst, &mut rng);
        match e.level2 {
            Level2Status::NotFired => {}
            Level2Status::Rejected => fired += 1,
            Level2Status::Accepted => {
                fired += 1;
                accepted += 1;
                let new = e.objectives();
                ensure(new.improves_on(&e.level1), || format!("chromosome {k}: {new} vs {}", e.level1))?;
                ensure(!dominates(&e.level1, &new), || format!("chromosome {k}: level-1 dominates"))?;
            }
        }
    }
    let freq = fired as f64 / trials as f64;
    ensure((freq - 0.30).abs() <= 0.02, || format!("firing frequency {freq}"))?;
    Ok(format!(
        "{} : fired {freq:.4}, {accepted} accepted results all improve and are not dominated",
        if real { "Mk01" } else { "Mk01-size stand-in" }
    ))
}

/// Non-dominated set of `budget` random chromosomes under the same evaluator.
fn random_sampling(inst: &FjspInstance, budget: usize, seed: u64) -> Vec<ObjectiveVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut archive = Vec::new();
    for _ in 0..budget {
        let c = random_chromosome(inst, &mut rng);
        let o = evaluate(&c, inst, &mut rng).objectives();
        if !archive.iter().any(|a| dominates(a, &o) || *a == o) {
            archive.retain(|a| !dominates(&o, a));
            archive.push(o);
        }
    }
    archive
}

fn criterion_7() -> Check {
    let (inst, real) = benchmark_or_standin("Mk01");
    let budget = RunConfig::BRDATA_BUDGET;
    let cfg = |seed| RunConfig {
        population_size: 100,
        evaluation_budget: budget,
        seed,
        ..RunConfig::default()
    };
    let started = Instant::now();
    let single = run(&inst, &cfg(0)).map_err(|e| Failure::Broken(e.to_string()))?;
    let single_time = started.elapsed();
    ensure(single_time < Duration::from_secs(300), || format!("single run took {single_time:?}"))?;
    let objs: Vec<ObjectiveVector> = single.front.iter().map(|i| i.objectives).collect();
    for a in &objs {
        ensure(!objs.iter().any(|b| dominates(b, a)), || "returned front has a dominated member".into())?;
    }

    let outcomes: Vec<(f64, f64)> = (0..30u64)
        .into_par_iter()
        .map(|seed| {
            let moea: Vec<ObjectiveVector> = if seed == 0 {
                objs.clone()
            } else {
                run(&inst, &cfg(seed)).unwrap().front.iter().map(|i| i.objectives).collect()
            };
            let baseline = random_sampling(&inst, budget, seed);
            let union = nd_filter(moea.iter().chain(&baseline).copied());
            let mut max = [0.0f64; 3];
            for p in union.points() {
                for (m, v) in max.iter_mut().zip(p.to_f64()) {
                    *m = m.max(v);
                }
            }
            let reference = HvReference::new(max.map(|m| REFERENCE_SCALE * m)).unwrap();
            (hypervolume3(&moea, &reference), hypervolume3(&baseline, &reference))
        })
        .collect();
    let wins = outcomes.iter().filter(|(a, b)| a > b).count();
    ensure(wins >= 29, || format!("only {wins}/30 paired wins: {outcomes:?}"))?;
    Ok(format!(
        "{}: single run {single_time:.1?}, |front| {}, {wins}/30 paired HV wins over random sampling",
        if real { "Mk01" } else { "Mk01-size stand-in" },
        objs.len()
    ))
}

const MK06_NEW: [[u64; 3]; 6] = [
    [61, 427, 53],
    [63, 428, 52],
    [63, 435, 51],
    [65, 453, 49],
    [66, 451, 49],
    [66, 457, 48],
];

const MK10_NEW: [[u64; 3]; 11] = [
    [218, 1973, 195],
    [218, 1991, 194],
    [219, 1965, 195],
    [220, 1984, 191],
    [225, 1979, 194],
    [226, 1954, 196],
    [226, 1974, 194],
    [226, 1979, 192],
    [228, 1973, 194],
    [235, 1938, 199],
    [236, 1978, 193],
];

fn criterion_8() -> Check {
    for (name, rows) in [("Mk06", &MK06_NEW[..]), ("Mk10", &MK10_NEW[..])] {
        let pts: Vec<ObjectiveVector> = rows.iter().map(|r| ObjectiveVector::from(*r)).collect();
        let kept = nd_filter(pts.iter().copied());
        ensure(kept.len() == pts.len() && pts.iter().all(|p| kept.contains(p)), || {
            format!("{name}: nd_filter kept {} of {}", kept.len(), pts.len())
        })?;
    }
    let dir = benchmark_dir();
    let mut missing = Vec::new();
    let mut checked = 0;
    for s in &BENCHMARK_SCALES {
        let Some(path) = find_benchmark(&dir, s.name) else {
            missing.push(s.name);
            continue;
        };
        let inst = FjspInstance::from_file(&path).map_err(|e| Failure::Broken(format!("{}: {e}", s.name)))?;
        let got = (inst.num_jobs(), inst.num_machines(), inst.total_operations());
        ensure(got == (s.jobs, s.machines, s.operations), || format!("{}: parsed {got:?}", s.name))?;
        let flex = inst.declared_flexibility().unwrap_or_else(|| inst.flexibility());
        ensure((flex - s.flexibility).abs() < 0.005, || {
            format!("{}: flexibility {flex} vs {}", s.name, s.flexibility)
        })?;
        checked += 1;
    }
    if !missing.is_empty() {
        return Err(Failure::MissingData(format!(
            "published vectors mutually non-dominated (6 + 11); instance statistics unverifiable: {} of 14 files missing from {} ({})",
            missing.len(),
            dir.display(),
            missing.join(", ")
        )));
    }
    Ok(format!("published vectors mutually non-dominated; {checked}/14 instance rows match"))
}

fn criterion_9() -> Check {
    let bin = env!("CARGO_BIN_EXE_fjsp");
    let tmp = tempfile::tempdir().map_err(|e| Failure::Broken(e.to_string()))?;
    let instance = tmp.path().join("toy.fjs");
    std::fs::write(&instance, TOY).unwrap();
    let exec = |args: &[&str]| -> Result<(), Failure> {
        let out = Command::new(bin)
            .args(args)
            .output()
            .map_err(|e| Failure::Broken(format!("spawn: {e}")))?;
        ensure(out.status.success(), || {
            format!("{args:?} failed: {}", String::from_utf8_lossy(&out.stderr))
        })
    };
    let read = |p: PathBuf| std::fs::read(&p).map_err(|e| Failure::Broken(format!("{}: {e}", p.display())));
    let inst = instance.to_str().unwrap();
    let mut compared = 0;
    for (sub, extra, files) in [
        (
            "solve",
            &["--pop", "20", "--evals", "600", "--runs", "3"][..],
            &["report.json", "front.csv"][..],
        ),
        (
            "tune",
            &["--pop", "10", "--evals", "100", "--budget", "4", "--inner-runs", "2"][..],
            &["tune.json"][..],
        ),
    ] {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let dir = tmp.path().join(format!("{sub}{rep}"));
            let mut args = vec![sub, inst, "--seed", "42", "--out", dir.to_str().unwrap()];
            args.extend_from_slice(extra);
            exec(&args)?;
            let mut bytes = Vec::new();
            for f in files {
                bytes.push(read(dir.join(f))?);
            }
            outputs.push(bytes);
        }
        ensure(outputs[0] == outputs[1], || format!("{sub}: reports differ"))?;
        compared += files.len();
    }
    // Parallel execution reproduces the serial report.
    let par = tmp.path().join("solve_par");
    exec(&[
        "solve", inst, "--seed", "42", "--out", par.to_str().unwrap(), "--pop", "20", "--evals", "600", "--runs", "3",
        "--parallel",
    ])?;
    ensure(read(par.join("report.json"))? == read(tmp.path().join("solve0/report.json"))?, || {
        "parallel solve differs from serial".into()
    })?;
    Ok(format!("solve and tune repeated with seed 42: {compared} files byte-identical; parallel solve identical"))
}

type Criterion = (&'static str, &'static str, fn() -> Check);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("1", "toy-instance exactness", criterion_1),
        ("2", "decoder witness", criterion_2),
        ("3", "feasibility fuzzing", criterion_3),
        ("4", "sorting oracle", criterion_4),
        ("5", "hypervolume oracle", criterion_5),
        ("6", "level-2 acceptance contract", criterion_6),
        ("7", "protocol scale check", criterion_7),
        ("8", "published-data consistency", criterion_8),
        ("9", "determinism", criterion_9),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let strict = std::env::var_os("FJSP_ACCEPTANCE_STRICT").is_some();
    let mut n_broken = 0;
    let mut n_missing = 0;
    panic::set_hook(Box::new(|_| {}));
    for (id, title, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| f == id) {
            continue;
        }
        let started = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|p| {
                let msg = p
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                broken(format!("panicked: {msg}"))
            });
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  criterion {id} ({title}, {secs:.1}s): {detail}"),
            Err(Failure::Broken(detail)) => {
                n_broken += 1;
                println!("FAIL  criterion {id} ({title}, {secs:.1}s): {detail}");
            }
            Err(Failure::MissingData(detail)) => {
                n_missing += 1;
                println!("FAIL  criterion {id} ({title}, {secs:.1}s) [missing data]: {detail}");
            }
        }
    }
    println!("acceptance: {n_broken} failed, {n_missing} failed for missing data");
    if n_broken > 0 || (strict && n_missing > 0) {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
