//! Python bindings for `fjsp-core`.

#[pyo3::pymodule]
pub mod fjsp_moea {
    use std::path::PathBuf;

    use fjsp_core::decoder::{evaluate_forced, Level2Status, ObjectiveVector};
    use fjsp_core::experiment::{run_campaign, Campaign};
    use fjsp_core::genome::{Chromosome, ChromosomeRecord};
    use fjsp_core::initializer::{build_individual, MaInit, OsInit};
    use fjsp_core::instance::{parse_fjs, FjspInstance};
    use fjsp_core::metrics::{hypervolume3, HvReference};
    use fjsp_core::moea::RunConfig;
    use fjsp_core::synth::{synthesize, SynthSpec};
    use fjsp_core::variation::VariationConfig;
    use pyo3::exceptions::PyValueError;
    use pyo3::prelude::*;
    use pyo3::types::PyDict;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    type Triple = (u64, u64, u64);

    fn value_err(e: impl std::fmt::Display) -> PyErr {
        PyValueError::new_err(e.to_string())
    }

    fn triple(v: ObjectiveVector) -> Triple {
        (v.makespan, v.total_workload, v.critical_workload)
    }

    /// A flexible job-shop instance.
    #[pyclass(frozen, skip_from_py_object, module = "fjsp_moea")]
    #[derive(Clone)]
    pub struct Instance {
        pub inner: FjspInstance,
    }

    #[pymethods]
    impl Instance {
        /// Parses `.fjs` text.
        #[staticmethod]
        fn from_text(text: &str) -> PyResult<Self> {
            parse_fjs(text).map(|inner| Self { inner }).map_err(value_err)
        }

        #[staticmethod]
        fn from_file(path: PathBuf) -> PyResult<Self> {
            FjspInstance::from_file(path).map(|inner| Self { inner }).map_err(value_err)
        }

        /// Seeded random instance with the given dimensions.
        #[staticmethod]
        #[pyo3(signature = (jobs, machines, operations, flexibility, max_duration = 10, seed = 0))]
        fn synthetic(
            jobs: usize,
            machines: usize,
            operations: usize,
            flexibility: f64,
            max_duration: u64,
            seed: u64,
        ) -> PyResult<Self> {
            if jobs == 0 || machines == 0 || operations < jobs || max_duration == 0 {
                return Err(value_err("need jobs >= 1, machines >= 1, operations >= jobs, max_duration >= 1"));
            }
            let spec = SynthSpec {
                jobs,
                machines,
                operations,
                flexibility,
                min_duration: 1,
                max_duration,
            };
            Ok(Self {
                inner: synthesize(&spec, seed),
            })
        }

        #[getter]
        fn num_jobs(&self) -> usize {
            self.inner.num_jobs()
        }

        #[getter]
        fn num_machines(&self) -> usize {
            self.inner.num_machines()
        }

        #[getter]
        fn total_operations(&self) -> usize {
            self.inner.total_operations()
        }

        #[getter]
        fn flexibility(&self) -> f64 {
            self.inner.flexibility()
        }

        /// Operations of job `job` as lists of (machine, duration), 0-based machines.
        fn job(&self, job: usize) -> PyResult<Vec<Vec<(usize, u64)>>> {
            let j = self
                .inner
                .jobs()
                .get(job)
                .ok_or_else(|| value_err(format!("no job {job}")))?;
            Ok(j.operations
                .iter()
                .map(|op| op.alternatives.iter().map(|a| (a.machine, a.duration)).collect())
                .collect())
        }

        fn to_fjs(&self) -> String {
            self.inner.to_fjs()
        }

        fn __repr__(&self) -> String {
            format!(
                "Instance(jobs={}, machines={}, operations={})",
                self.inner.num_jobs(),
                self.inner.num_machines(),
                self.inner.total_operations()
            )
        }
    }

    /// A uniformly random chromosome as (os, ma), both 0-based.
    #[pyfunction]
    #[pyo3(signature = (instance, seed = 0))]
    fn random_chromosome(instance: &Instance, seed: u64) -> (Vec<usize>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = build_individual(MaInit::Random, OsInit::Random, &instance.inner, &mut rng);
        (c.os, c.ma)
    }

    /// Decodes a 0-based chromosome. Returns a dict with `objectives`,
    /// `level1`, `level2` status, the re-sorted `os` and the 1-based
    /// `schedule` rows (job, op, machine, start, end).
    #[pyfunction]
    #[pyo3(signature = (instance, os, ma, level2 = false))]
    fn decode<'py>(
        py: Python<'py>,
        instance: &Instance,
        os: Vec<usize>,
        ma: Vec<usize>,
        level2: bool,
    ) -> PyResult<Bound<'py, PyDict>> {
        let c = Chromosome { os, ma };
        c.validate(&instance.inner).map_err(value_err)?;
        let eval = evaluate_forced(&c, &instance.inner, level2);
        let status = match eval.level2 {
            Level2Status::NotFired => "not_fired",
            Level2Status::Rejected => "rejected",
            Level2Status::Accepted => "accepted",
        };
        let rows: Vec<(usize, usize, usize, u64, u64)> = eval
            .decoded
            .schedule
            .rows()
            .into_iter()
            .map(|r| (r.job, r.op, r.machine, r.start, r.end))
            .collect();
        let out = PyDict::new(py);
        out.set_item("objectives", triple(eval.objectives()))?;
        out.set_item("level1", triple(eval.level1))?;
        out.set_item("level2", status)?;
        out.set_item("os", eval.decoded.chromosome.os.clone())?;
        out.set_item("schedule", rows)?;
        Ok(out)
    }

    /// Runs `runs` independent NSGA-III runs and returns the campaign report
    /// as a dict (same layout as `report.json`).
    #[pyfunction]
    #[pyo3(signature = (
        instance,
        population_size = 100,
        evaluations = RunConfig::BRDATA_BUDGET,
        runs = 1,
        seed = 0,
        p_insert = 0.6,
        p_swap1 = 0.6,
        p_swap2 = 0.6,
        level2_probability = fjsp_core::decoder::LEVEL2_PROBABILITY,
        parallel = false,
    ))]
    #[allow(clippy::too_many_arguments)]
    fn solve<'py>(
        py: Python<'py>,
        instance: &Instance,
        population_size: usize,
        evaluations: usize,
        runs: usize,
        seed: u64,
        p_insert: f64,
        p_swap1: f64,
        p_swap2: f64,
        level2_probability: f64,
        parallel: bool,
    ) -> PyResult<Bound<'py, PyAny>> {
        let config = RunConfig {
            population_size,
            evaluation_budget: evaluations,
            variation: VariationConfig::with_mutation(p_insert, p_swap1, p_swap2),
            level2_probability,
            seed,
            ..RunConfig::default()
        };
        let mut campaign = Campaign::new(config, runs, seed);
        campaign.parallel = parallel;
        let inst = &instance.inner;
        let report = py
            .detach(|| run_campaign(inst, "instance", &campaign))
            .map_err(value_err)?;
        let json = serde_json::to_string(&report).map_err(value_err)?;
        py.import("json")?.call_method1("loads", (json,))
    }

    /// Exact hypervolume of minimisation points against `reference`.
    /// With `normalize`, coordinates are divided by the reference first.
    #[pyfunction]
    #[pyo3(signature = (points, reference, normalize = true))]
    fn hypervolume(points: Vec<Triple>, reference: [f64; 3], normalize: bool) -> PyResult<f64> {
        let mut r = HvReference::new(reference).map_err(value_err)?;
        r.normalize = normalize;
        let pts: Vec<ObjectiveVector> = points.into_iter().map(|(a, b, c)| ObjectiveVector::new(a, b, c)).collect();
        Ok(hypervolume3(&pts, &r))
    }

    /// Non-dominated, de-duplicated subset in lexicographic order.
    #[pyfunction]
    fn nd_filter(points: Vec<Triple>) -> Vec<Triple> {
        fjsp_core::metrics::nd_filter(points.into_iter().map(|(a, b, c)| ObjectiveVector::new(a, b, c)))
            .points()
            .iter()
            .map(|&v| triple(v))
            .collect()
    }

    /// Layered non-dominated sorting; returns index fronts.
    #[pyfunction]
    fn nondominated_sort(points: Vec<Triple>) -> Vec<Vec<usize>> {
        let objs: Vec<ObjectiveVector> = points.into_iter().map(|(a, b, c)| ObjectiveVector::new(a, b, c)).collect();
        fjsp_core::moea::fast_nondominated_sort(&objs)
    }

    /// Structured reference points on the unit simplex.
    #[pyfunction]
    fn das_dennis(divisions: usize) -> Vec<[f64; 3]> {
        fjsp_core::moea::das_dennis(divisions).points
    }

    /// Converts a 1-based (os, ma) record to 0-based, checking it against `instance`.
    #[pyfunction]
    fn from_one_based(instance: &Instance, os: Vec<usize>, ma: Vec<usize>) -> PyResult<(Vec<usize>, Vec<usize>)> {
        let c = Chromosome::try_from(&ChromosomeRecord { os, ma }).map_err(value_err)?;
        c.validate(&instance.inner).map_err(value_err)?;
        Ok((c.os, c.ma))
    }
}

pub use self::fjsp_moea::Instance;
