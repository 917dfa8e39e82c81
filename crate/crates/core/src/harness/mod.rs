//! Closed-loop orchestration, the session protocol, configuration and export.

pub mod config;
pub mod export;
pub mod protocol;
pub mod sim;

use std::path::PathBuf;

use rayon::prelude::*;
use thiserror::Error;

pub use config::{ExperimentConfig, ProtocolConfig, Session};
pub use export::export;
pub use protocol::{run_episode, run_protocol, ConvergenceSummary, EpisodeLog, SessionLog, SessionMetrics};
pub use sim::{CycleRecord, Simulation, TraceRow};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("phase estimator lost lock: no landmark event for too long at t = {time:.3} s")]
    LockLost { time: f64 },
    #[error(transparent)]
    Oscillator(#[from] crate::oscillator::OscillatorError),
    #[error(transparent)]
    Plant(#[from] crate::plant::PlantError),
    #[error(transparent)]
    Symmetry(#[from] crate::symmetry::SymmetryError),
    #[error(transparent)]
    Optimizer(#[from] crate::optimizer::OptimizerError),
}

/// Runs the protocol once per seed, in parallel. Results are in seed order.
pub fn run_sweep(cfg: &ExperimentConfig, seeds: &[u64]) -> Vec<(u64, Result<SessionLog, HarnessError>)> {
    seeds
        .par_iter()
        .map(|&seed| {
            let c = ExperimentConfig { seed, ..cfg.clone() };
            (seed, run_protocol(&c))
        })
        .collect()
}
