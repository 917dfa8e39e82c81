//! Zero-mean Gaussian-process surrogate with a squared-exponential kernel.
//!
//! Inputs are gains mapped to the unit square of the feasible region; outputs
//! are standardized with a fixed offset and scale before fitting.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use super::region::Region;
use super::OptimizerError;
use crate::controller::GainSet;

/// Diagonal jitter used when the kernel matrix is not positive definite.
pub const JITTER: f64 = 1e-8;

/// Kernel hyperparameters in standardized output units and normalized
/// input units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub sigma: f64,
    pub sigma_noise: f64,
    pub l1: f64,
    pub l2: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self { sigma: 1.0, sigma_noise: 0.1, l1: 0.3, l2: 0.3 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GpDataset {
    pub points: Vec<(GainSet, f64)>,
}

impl GpDataset {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn push(&mut self, gains: GainSet, y: f64) {
        self.points.push((gains, y));
    }

    pub fn best(&self) -> Option<(GainSet, f64)> {
        self.points.iter().copied().fold(None, |acc, p| match acc {
            Some((_, y)) if y >= p.1 => acc,
            _ => Some(p),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpModel {
    pub dataset: GpDataset,
    pub hyper: Hyperparams,
    pub region: Region,
    /// Subtracted from every observation before fitting.
    pub y_offset: f64,
    /// Observations are divided by this after the offset.
    pub y_scale: f64,
}

impl GpModel {
    pub fn new(region: Region, hyper: Hyperparams) -> Self {
        Self { dataset: GpDataset::default(), hyper, region, y_offset: 0.0, y_scale: 1.0 }
    }

    pub fn standardized(&self, y: f64) -> f64 {
        (y - self.y_offset) / self.y_scale
    }

    pub fn inputs(&self) -> Vec<[f64; 2]> {
        self.dataset.points.iter().map(|(g, _)| self.region.normalize(*g)).collect()
    }

    pub fn targets(&self) -> DVector<f64> {
        DVector::from_iterator(self.dataset.len(), self.dataset.points.iter().map(|(_, y)| self.standardized(*y)))
    }

    /// Factorizes the kernel system for repeated predictions.
    pub fn fit(&self) -> Result<GpPosterior, OptimizerError> {
        let xs = self.inputs();
        let y = self.targets();
        let (chol, jitter_used) = factor(&xs, &self.hyper)?;
        let alpha = chol.solve(&y);
        Ok(GpPosterior {
            xs,
            chol,
            alpha,
            y,
            hyper: self.hyper,
            region: self.region,
            y_offset: self.y_offset,
            y_scale: self.y_scale,
            jitter_used,
        })
    }
}

pub fn kernel(a: [f64; 2], b: [f64; 2], h: &Hyperparams) -> f64 {
    let d0 = (a[0] - b[0]) / h.l1;
    let d1 = (a[1] - b[1]) / h.l2;
    h.sigma * h.sigma * (-0.5 * (d0 * d0 + d1 * d1)).exp()
}

fn factor(xs: &[[f64; 2]], h: &Hyperparams) -> Result<(Cholesky<f64, Dyn>, bool), OptimizerError> {
    let n = xs.len();
    let noise = h.sigma_noise * h.sigma_noise;
    let k = DMatrix::from_fn(n, n, |i, j| kernel(xs[i], xs[j], h) + if i == j { noise } else { 0.0 });
    if let Some(c) = Cholesky::new(k.clone()) {
        return Ok((c, false));
    }
    let kj = k + DMatrix::identity(n, n) * JITTER;
    Cholesky::new(kj).map(|c| (c, true)).ok_or(OptimizerError::Conditioning)
}

/// A fitted posterior.
#[derive(Debug, Clone)]
pub struct GpPosterior {
    xs: Vec<[f64; 2]>,
    chol: Cholesky<f64, Dyn>,
    alpha: DVector<f64>,
    y: DVector<f64>,
    pub hyper: Hyperparams,
    pub region: Region,
    pub y_offset: f64,
    pub y_scale: f64,
    /// Set when the diagonal jitter fallback was needed.
    pub jitter_used: bool,
}

impl GpPosterior {
    /// Posterior mean and standard deviation at a unit-square point, in
    /// standardized units.
    pub fn predict_normalized(&self, u: [f64; 2]) -> (f64, f64) {
        let h = &self.hyper;
        if self.xs.is_empty() {
            return (0.0, h.sigma);
        }
        let ks = DVector::from_iterator(self.xs.len(), self.xs.iter().map(|x| kernel(*x, u, h)));
        let mu = ks.dot(&self.alpha);
        let v = self.chol.l().solve_lower_triangular(&ks).unwrap_or_else(|| ks.clone());
        let var = h.sigma * h.sigma - v.dot(&v);
        (mu, var.max(0.0).sqrt())
    }

    /// Posterior mean and standard deviation in objective units.
    pub fn predict(&self, g: GainSet) -> (f64, f64) {
        let (m, s) = self.predict_normalized(self.region.normalize(g));
        (self.y_offset + self.y_scale * m, self.y_scale * s)
    }

    /// Log marginal likelihood of the standardized targets.
    pub fn log_marginal_likelihood(&self) -> f64 {
        let n = self.xs.len() as f64;
        let logdet: f64 = self.chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum();
        -0.5 * self.y.dot(&self.alpha) - logdet - 0.5 * n * (2.0 * std::f64::consts::PI).ln()
    }

    /// Largest standardized observation.
    pub fn best_observed(&self) -> Option<f64> {
        self.y.iter().copied().reduce(f64::max)
    }
}

/// Posterior mean and standard deviation at `x_star`, in objective units.
pub fn gp_posterior(model: &GpModel, x_star: GainSet) -> Result<(f64, f64), OptimizerError> {
    Ok(model.fit()?.predict(x_star))
}

/// Log marginal likelihood of `model`'s data under `hyper`.
pub fn log_marginal_likelihood(model: &GpModel, hyper: &Hyperparams) -> Result<f64, OptimizerError> {
    let m = GpModel { hyper: *hyper, ..model.clone() };
    Ok(m.fit()?.log_marginal_likelihood())
}
