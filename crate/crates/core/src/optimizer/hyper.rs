//! Marginal-likelihood fitting of the kernel hyperparameters.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gp::{GpModel, Hyperparams};

/// Search box for the hyperparameters.
///
/// Signal and noise bounds are multiples of the standard deviation of the
/// standardized targets; length scales are in unit-square coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HyperBounds {
    pub sigma: [f64; 2],
    pub sigma_noise: [f64; 2],
    pub length: [f64; 2],
    /// Grid points per dimension for the start scan.
    pub scan_points: usize,
    /// Number of best scan points refined locally.
    pub refine_starts: usize,
}

impl Default for HyperBounds {
    fn default() -> Self {
        Self { sigma: [1e-3, 10.0], sigma_noise: [1e-4, 1.0], length: [0.05, 2.0], scan_points: 5, refine_starts: 4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperFit {
    pub hyper: Hyperparams,
    pub log_likelihood: f64,
    /// Set when no candidate produced a finite likelihood and the previous
    /// hyperparameters were kept.
    pub kept_previous: bool,
}

fn target_std(model: &GpModel) -> f64 {
    let y = model.targets();
    let n = y.len();
    if n < 2 {
        return 1.0;
    }
    let m = y.mean();
    let s = (y.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64).sqrt();
    if s > 1e-12 {
        s
    } else {
        1.0
    }
}

/// Log-space bounds `[lo; 4], [hi; 4]` for `(sigma, sigma_noise, l1, l2)`.
pub fn log_bounds(model: &GpModel, b: &HyperBounds) -> ([f64; 4], [f64; 4]) {
    let s = target_std(model);
    (
        [(b.sigma[0] * s).ln(), (b.sigma_noise[0] * s).ln(), b.length[0].ln(), b.length[0].ln()],
        [(b.sigma[1] * s).ln(), (b.sigma_noise[1] * s).ln(), b.length[1].ln(), b.length[1].ln()],
    )
}

fn unpack(z: &[f64; 4]) -> Hyperparams {
    Hyperparams { sigma: z[0].exp(), sigma_noise: z[1].exp(), l1: z[2].exp(), l2: z[3].exp() }
}

fn pack(h: &Hyperparams) -> [f64; 4] {
    [h.sigma.ln(), h.sigma_noise.ln(), h.l1.ln(), h.l2.ln()]
}

fn neg_lml(model: &GpModel, z: &[f64; 4]) -> f64 {
    let m = GpModel { hyper: unpack(z), ..model.clone() };
    match m.fit() {
        Ok(p) if !p.jitter_used => {
            let v = p.log_marginal_likelihood();
            if v.is_finite() {
                -v
            } else {
                f64::INFINITY
            }
        }
        _ => f64::INFINITY,
    }
}

/// Bounded Nelder-Mead minimization; points are projected into the box.
pub fn nelder_mead<const D: usize>(
    f: impl Fn(&[f64; D]) -> f64,
    x0: [f64; D],
    step: [f64; D],
    lo: [f64; D],
    hi: [f64; D],
    max_evals: usize,
) -> ([f64; D], f64) {
    let proj = |x: [f64; D]| {
        let mut y = x;
        for i in 0..D {
            y[i] = y[i].clamp(lo[i], hi[i]);
        }
        y
    };
    let mut simplex: Vec<([f64; D], f64)> = Vec::with_capacity(D + 1);
    let x0 = proj(x0);
    simplex.push((x0, f(&x0)));
    for i in 0..D {
        let mut x = x0;
        x[i] += if x[i] + step[i] <= hi[i] { step[i] } else { -step[i] };
        let x = proj(x);
        simplex.push((x, f(&x)));
    }
    let mut evals = D + 1;
    let lerp = |a: &[f64; D], b: &[f64; D], t: f64| {
        let mut y = [0.0; D];
        for i in 0..D {
            y[i] = a[i] + t * (b[i] - a[i]);
        }
        proj(y)
    };
    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (best, worst) = (simplex[0].1, simplex[D].1);
        if worst.is_finite() && (worst - best).abs() <= 1e-10 * (1.0 + best.abs()) {
            break;
        }
        let mut c = [0.0; D];
        for (x, _) in &simplex[..D] {
            for i in 0..D {
                c[i] += x[i] / D as f64;
            }
        }
        let xw = simplex[D].0;
        let xr = lerp(&c, &xw, -1.0);
        let fr = f(&xr);
        evals += 1;
        if fr < simplex[0].1 {
            let xe = lerp(&c, &xw, -2.0);
            let fe = f(&xe);
            evals += 1;
            simplex[D] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[D - 1].1 {
            simplex[D] = (xr, fr);
        } else {
            let (xc, fc) = if fr < simplex[D].1 {
                let x = lerp(&c, &xw, -0.5);
                (x, f(&x))
            } else {
                let x = lerp(&c, &xw, 0.5);
                (x, f(&x))
            };
            evals += 1;
            if fc < simplex[D].1.min(fr) {
                simplex[D] = (xc, fc);
            } else {
                let x_best = simplex[0].0;
                for v in simplex.iter_mut().skip(1) {
                    let x = lerp(&x_best, &v.0, 0.5);
                    *v = (x, f(&x));
                    evals += 1;
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex[0]
}

/// Maximizes the log marginal likelihood over the bounded box.
///
/// A fixed log-spaced grid is scanned, the best few grid points and the
/// current hyperparameters are refined with Nelder-Mead, and the best result
/// wins. Deterministic for a given dataset.
pub fn optimize_hyperparams(model: &GpModel, bounds: &HyperBounds) -> HyperFit {
    let (lo, hi) = log_bounds(model, bounds);
    let n = bounds.scan_points.max(2);
    let axis = |d: usize, k: usize| lo[d] + (hi[d] - lo[d]) * k as f64 / (n - 1) as f64;
    let grid: Vec<[f64; 4]> = (0..n.pow(4))
        .map(|idx| {
            let (a, b, c, d) = (idx % n, (idx / n) % n, (idx / n / n) % n, idx / n / n / n);
            [axis(0, a), axis(1, b), axis(2, c), axis(3, d)]
        })
        .collect();
    let scored: Vec<([f64; 4], f64)> = grid.par_iter().map(|z| (*z, neg_lml(model, z))).collect();
    let mut ranked: Vec<&([f64; 4], f64)> = scored.iter().filter(|s| s.1.is_finite()).collect();
    ranked.sort_by(|a, b| a.1.total_cmp(&b.1));

    let mut starts: Vec<[f64; 4]> = ranked.iter().take(bounds.refine_starts).map(|s| s.0).collect();
    let prev = pack(&model.hyper);
    if prev.iter().all(|v| v.is_finite()) {
        starts.push(prev);
    }
    let mut step = [0.0; 4];
    for i in 0..4 {
        step[i] = 0.25 * (hi[i] - lo[i]) / (n - 1) as f64;
    }
    let refined: Vec<([f64; 4], f64)> = starts.par_iter().map(|z| nelder_mead(|x| neg_lml(model, x), *z, step, lo, hi, 400)).collect();

    let best =
        refined.into_iter().chain(ranked.first().map(|s| **s)).filter(|r| r.1.is_finite()).fold(None, |acc: Option<([f64; 4], f64)>, r| {
            match acc {
                Some(a) if a.1 <= r.1 => Some(a),
                _ => Some(r),
            }
        });
    match best {
        Some((z, v)) => HyperFit { hyper: unpack(&z), log_likelihood: -v, kept_previous: false },
        None => HyperFit { hyper: model.hyper, log_likelihood: f64::NEG_INFINITY, kept_previous: true },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nelder_mead_finds_bowl_minimum() {
        let f = |x: &[f64; 2]| (x[0] - 0.3).powi(2) + 4.0 * (x[1] + 0.2).powi(2);
        let (x, v) = nelder_mead(f, [1.0, 1.0], [0.2, 0.2], [-2.0, -2.0], [2.0, 2.0], 1000);
        assert!((x[0] - 0.3).abs() < 1e-4 && (x[1] + 0.2).abs() < 1e-4, "{x:?}");
        assert!(v < 1e-8);
    }

    #[test]
    fn nelder_mead_respects_bounds() {
        let f = |x: &[f64; 1]| (x[0] - 5.0).powi(2);
        let (x, _) = nelder_mead(f, [0.0], [0.5], [-1.0], [1.0], 500);
        assert!((x[0] - 1.0).abs() < 1e-6);
    }
}
