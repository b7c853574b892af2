//! Seeded random instances with prescribed dimensions.
//!
//! Used as stand-ins when benchmark files are not available. They share the
//! job, machine and operation counts and the average flexibility of the
//! named benchmarks, not their processing times.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::experiment::BenchmarkScale;
use crate::instance::{Alternative, FjspInstance, Job, Operation, Time};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    pub jobs: usize,
    pub machines: usize,
    pub operations: usize,
    /// Target mean number of alternatives per operation.
    pub flexibility: f64,
    pub min_duration: Time,
    pub max_duration: Time,
}

impl SynthSpec {
    pub fn from_scale(s: &BenchmarkScale) -> Self {
        Self {
            jobs: s.jobs,
            machines: s.machines,
            operations: s.operations,
            flexibility: s.flexibility,
            min_duration: 1,
            max_duration: 10,
        }
    }
}

/// Builds an instance matching `spec`. Panics if the parameters are inconsistent
/// (fewer operations than jobs, no machines, or an empty duration range).
pub fn synthesize(spec: &SynthSpec, seed: u64) -> FjspInstance {
    assert!(spec.jobs >= 1 && spec.machines >= 1 && spec.operations >= spec.jobs);
    assert!(1 <= spec.min_duration && spec.min_duration <= spec.max_duration);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut lengths = vec![1usize; spec.jobs];
    for _ in spec.jobs..spec.operations {
        lengths[rng.random_range(0..spec.jobs)] += 1;
    }

    let flex = spec.flexibility.clamp(1.0, spec.machines as f64);
    let base = flex.floor() as usize;
    let frac = flex - base as f64;
    let jobs = lengths
        .iter()
        .map(|&len| Job {
            operations: (0..len)
                .map(|_| {
                    let k = (base + usize::from(rng.random_bool(frac))).min(spec.machines);
                    let mut machines = sample(&mut rng, spec.machines, k).into_vec();
                    machines.sort_unstable();
                    Operation {
                        alternatives: machines
                            .into_iter()
                            .map(|machine| Alternative {
                                machine,
                                duration: rng.random_range(spec.min_duration..=spec.max_duration),
                            })
                            .collect(),
                    }
                })
                .collect(),
        })
        .collect();
    FjspInstance::new(spec.machines, jobs).expect("synthesised instance is valid")
}
