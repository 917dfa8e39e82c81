//! Sequential Bayesian optimization loop state.

use serde::{Deserialize, Serialize};

use super::acquisition::{next_params, NextParams};
use super::gp::{GpModel, Hyperparams};
use super::hyper::{optimize_hyperparams, HyperBounds};
use super::region::Region;
use super::stop::check_stop_with;
use super::OptimizerError;
use crate::controller::GainSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoConfig {
    pub region: Region,
    /// Exploration margin in standardized objective units.
    pub zeta: f64,
    pub hyper_bounds: HyperBounds,
    pub stop_threshold: f64,
    pub stop_window: usize,
    /// Maximum number of optimizer-selected episodes.
    pub max_episodes: usize,
}

impl Default for BoConfig {
    fn default() -> Self {
        Self {
            region: Region::default(),
            zeta: 0.01,
            hyper_bounds: HyperBounds::default(),
            stop_threshold: 0.03,
            stop_window: 3,
            max_episodes: 40,
        }
    }
}

impl BoConfig {
    pub fn validate(&self) -> Result<(), String> {
        self.region.validate()?;
        if !(self.zeta >= 0.0) {
            return Err(format!("bo.zeta must be >= 0, got {}", self.zeta));
        }
        let b = &self.hyper_bounds;
        for (name, [lo, hi]) in [("sigma", b.sigma), ("sigma_noise", b.sigma_noise), ("length", b.length)] {
            if !(lo > 0.0 && lo < hi && hi.is_finite()) {
                return Err(format!("bo.hyper_bounds.{name} must satisfy 0 < lo < hi"));
            }
        }
        if b.scan_points < 2 || b.refine_starts == 0 {
            return Err("bo.hyper_bounds needs scan_points >= 2 and refine_starts >= 1".into());
        }
        if !(self.stop_threshold > 0.0) || self.stop_window == 0 {
            return Err("bo stop settings must be positive".into());
        }
        if self.max_episodes == 0 {
            return Err("bo.max_episodes must be >= 1".into());
        }
        Ok(())
    }
}

/// Flags raised while running the loop.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BoFlags {
    pub jitter_used: bool,
    pub hyper_kept_previous: bool,
    pub exploration_fallback: bool,
}

/// Dataset, normalization and selection history of one optimization run.
#[derive(Debug, Clone)]
pub struct BayesOpt {
    pub cfg: BoConfig,
    pub model: GpModel,
    /// Number of leading observations used to set the output scale.
    n_init: usize,
    /// Gains picked by the acquisition, in order.
    pub selections: Vec<GainSet>,
    pub flags: BoFlags,
}

impl BayesOpt {
    pub fn new(cfg: BoConfig, n_init: usize) -> Self {
        Self {
            model: GpModel::new(cfg.region, Hyperparams::default()),
            cfg,
            n_init: n_init.max(1),
            selections: Vec::new(),
            flags: BoFlags::default(),
        }
    }

    pub fn observe(&mut self, gains: GainSet, objective: f64) {
        self.model.dataset.push(gains, objective);
        self.restandardize();
    }

    /// Offset is the mean of all observations; scale is the sample standard
    /// deviation of the initialization observations.
    fn restandardize(&mut self) {
        let ys: Vec<f64> = self.model.dataset.points.iter().map(|p| p.1).collect();
        let n = ys.len() as f64;
        self.model.y_offset = ys.iter().sum::<f64>() / n;
        let init = &ys[..ys.len().min(self.n_init)];
        let scale = if init.len() >= 2 {
            let m = init.iter().sum::<f64>() / init.len() as f64;
            (init.iter().map(|y| (y - m) * (y - m)).sum::<f64>() / (init.len() - 1) as f64).sqrt()
        } else {
            0.0
        };
        self.model.y_scale = if scale > 1e-12 { scale } else { 1.0 };
    }

    /// Refits the hyperparameters and proposes the next gains.
    pub fn suggest(&mut self) -> Result<NextParams, OptimizerError> {
        if self.model.dataset.len() >= 2 {
            let fit = optimize_hyperparams(&self.model, &self.cfg.hyper_bounds);
            self.flags.hyper_kept_previous |= fit.kept_previous;
            self.model.hyper = fit.hyper;
        }
        let post = self.model.fit()?;
        self.flags.jitter_used |= post.jitter_used;
        let next = next_params(&post, self.cfg.zeta);
        self.flags.exploration_fallback |= next.exploration_fallback;
        self.selections.push(next.gains);
        Ok(next)
    }

    pub fn converged(&self) -> bool {
        check_stop_with(&self.selections, &self.cfg.region, self.cfg.stop_threshold, self.cfg.stop_window)
    }

    /// Best observation so far.
    pub fn best(&self) -> Option<(GainSet, f64)> {
        self.model.dataset.best()
    }

    /// Evaluated gains with the highest posterior mean, which discounts
    /// lucky single samples. Falls back to the best raw observation if the
    /// model cannot be fitted.
    pub fn recommend(&self) -> Option<GainSet> {
        let Ok(post) = self.model.fit() else {
            return self.best().map(|b| b.0);
        };
        self.model
            .dataset
            .points
            .iter()
            .map(|p| (p.0, post.predict(p.0).0))
            .fold(None, |acc: Option<(GainSet, f64)>, (g, mu)| match acc {
                Some((_, m)) if m >= mu => acc,
                _ => Some((g, mu)),
            })
            .map(|b| b.0)
    }
}
