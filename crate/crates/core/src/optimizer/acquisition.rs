//! Expected-improvement acquisition over the feasible box.

use statrs::function::erf::erfc;

use super::gp::GpPosterior;
use crate::controller::GainSet;

/// Points per axis of the acquisition scan.
pub const SCAN_POINTS: usize = 101;

const TIE_TOL: f64 = 1e-12;

pub fn norm_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

pub fn norm_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// `(mu - y_best - zeta) cdf(z) + sigma pdf(z)`, zero when `sigma` is zero.
pub fn expected_improvement(mu: f64, sigma_star: f64, y_best: f64, zeta: f64) -> f64 {
    if !(sigma_star > 0.0) {
        return 0.0;
    }
    let imp = mu - y_best - zeta;
    let z = imp / sigma_star;
    (imp * norm_cdf(z) + sigma_star * norm_pdf(z)).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NextParams {
    pub gains: GainSet,
    /// Expected improvement at the returned point, standardized units.
    pub ei: f64,
    /// Set when the acquisition vanished everywhere and the point of largest
    /// posterior uncertainty was returned instead.
    pub exploration_fallback: bool,
}

fn better(a: f64, b: f64) -> bool {
    a > b + TIE_TOL * b.abs().max(f64::MIN_POSITIVE)
}

/// Maximizes EI over the unit square of `post.region`: a dense grid scan in
/// order of increasing `k_theta`, then `k_phi`, keeping the first of tied
/// maxima, followed by a bounded pattern search from the best grid point.
pub fn next_params(post: &GpPosterior, zeta: f64) -> NextParams {
    let y_best = post.best_observed().unwrap_or(0.0);
    let ei_at = |u: [f64; 2]| {
        let (m, s) = post.predict_normalized(u);
        expected_improvement(m, s, y_best, zeta)
    };
    let n = SCAN_POINTS;
    let coord = |k: usize| k as f64 / (n - 1) as f64;

    let mut best_u = [0.0, 0.0];
    let mut best_ei = f64::NEG_INFINITY;
    let mut best_sd_u = [0.0, 0.0];
    let mut best_sd = f64::NEG_INFINITY;
    for i in 0..n {
        for j in 0..n {
            let u = [coord(i), coord(j)];
            let (m, s) = post.predict_normalized(u);
            let ei = expected_improvement(m, s, y_best, zeta);
            if better(ei, best_ei) || best_ei == f64::NEG_INFINITY {
                best_ei = ei;
                best_u = u;
            }
            if better(s, best_sd) || best_sd == f64::NEG_INFINITY {
                best_sd = s;
                best_sd_u = u;
            }
        }
    }

    if best_ei <= 0.0 {
        return NextParams { gains: post.region.denormalize(best_sd_u), ei: 0.0, exploration_fallback: true };
    }

    let mut step = 0.5 / (n - 1) as f64;
    while step > 1e-4 {
        let mut moved = false;
        for d in [[step, 0.0], [-step, 0.0], [0.0, step], [0.0, -step]] {
            let u = [(best_u[0] + d[0]).clamp(0.0, 1.0), (best_u[1] + d[1]).clamp(0.0, 1.0)];
            let ei = ei_at(u);
            if better(ei, best_ei) {
                best_ei = ei;
                best_u = u;
                moved = true;
                break;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }

    NextParams { gains: post.region.denormalize(best_u), ei: best_ei, exploration_fallback: false }
}
