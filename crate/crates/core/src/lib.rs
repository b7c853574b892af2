//! Multi-objective flexible job-shop scheduling with NSGA-III.

pub mod decoder;
pub mod experiment;
pub mod genome;
pub mod initializer;
pub mod instance;
pub mod metrics;
pub mod moea;
pub mod synth;
pub mod variation;
