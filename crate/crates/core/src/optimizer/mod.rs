//! Human-in-the-loop Bayesian optimization of the control gains.

pub mod acquisition;
pub mod bo;
pub mod gp;
pub mod hyper;
pub mod objective;
pub mod region;
pub mod stop;

use thiserror::Error;

pub use acquisition::{expected_improvement, next_params, NextParams};
pub use bo::{BayesOpt, BoConfig, BoFlags};
pub use gp::{gp_posterior, log_marginal_likelihood, GpDataset, GpModel, GpPosterior, Hyperparams};
pub use hyper::{optimize_hyperparams, HyperBounds, HyperFit};
pub use objective::{activation, objective, EpisodeResult, EpisodeStats, ObjectiveWeights};
pub use region::Region;
pub use stop::{check_stop, normalized_change};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizerError {
    #[error("kernel matrix is not positive definite even with diagonal jitter")]
    Conditioning,
}
