//! Assist-as-needed hip exoskeleton control stack with a synthetic walker.
//!
//! The crate is split into the estimation and control pieces that would run
//! on the device ([`oscillator`], [`symmetry`], [`controller`], [`optimizer`])
//! and the simulation side used to exercise them ([`plant`], [`harness`]).

// `!(x > 0.0)` is used on purpose in validation so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod controller;
pub mod harness;
pub mod optimizer;
pub mod oscillator;
pub mod phase;
pub mod plant;
pub mod symmetry;

use serde::{Deserialize, Serialize};

pub use controller::{AssistState, CurveConfig, GainSet, IlcConfig};
pub use harness::{run_episode, run_protocol, ExperimentConfig, ProtocolConfig, Session, SessionLog};
pub use optimizer::{EpisodeResult, GpDataset, GpModel, Hyperparams, ObjectiveWeights, Region};
pub use oscillator::{AoConfig, LandmarkEvent, OscillatorState, PhaseEstimator};
pub use plant::{HumanConfig, HumanState, Plant, WalkerConfig};
pub use symmetry::{GaitMetrics, StrideRecord, SymmetryErrors};

/// Which leg a quantity belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Impaired,
    Healthy,
}

/// Umbrella error for the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Oscillator(#[from] oscillator::OscillatorError),
    #[error(transparent)]
    Symmetry(#[from] symmetry::SymmetryError),
    #[error(transparent)]
    Optimizer(#[from] optimizer::OptimizerError),
    #[error(transparent)]
    Plant(#[from] plant::PlantError),
    #[error(transparent)]
    Harness(#[from] harness::HarnessError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
