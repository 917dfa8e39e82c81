//! Reference computations shared by the integration tests. Deliberately
//! written without the crate's linear algebra.

#![allow(dead_code)]

use aan_core::optimizer::{GpModel, Hyperparams};
use aan_core::GainSet;

/// Solves `a x = b` for every right-hand side column by Gaussian elimination
/// with partial pivoting. Returns the solutions (one per column) and
/// `ln |det a|`.
pub fn dense_solve(mut a: Vec<Vec<f64>>, rhs: &[Vec<f64>]) -> (Vec<Vec<f64>>, f64) {
    let n = a.len();
    for (i, row) in a.iter_mut().enumerate() {
        row.extend(rhs.iter().map(|col| col[i]));
    }
    let m = rhs.len();
    let mut logdet = 0.0;
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, p);
        logdet += a[c][c].abs().ln();
        let pivot = a[c].clone();
        for row in a.iter_mut().skip(c + 1) {
            let f = row[c] / pivot[c];
            for (x, p) in row.iter_mut().zip(&pivot).skip(c) {
                *x -= f * p;
            }
        }
    }
    let mut sol = vec![vec![0.0; n]; m];
    for (k, s) in sol.iter_mut().enumerate() {
        for i in (0..n).rev() {
            let acc: f64 = (i + 1..n).map(|j| a[i][j] * s[j]).sum();
            s[i] = (a[i][n + k] - acc) / a[i][i];
        }
    }
    (sol, logdet)
}

pub fn unit(model: &GpModel, g: GainSet) -> [f64; 2] {
    let r = model.region;
    [(g.k_theta - r.k_theta[0]) / (r.k_theta[1] - r.k_theta[0]), (g.k_phi - r.k_phi[0]) / (r.k_phi[1] - r.k_phi[0])]
}

pub fn se_kernel(a: [f64; 2], b: [f64; 2], h: &Hyperparams) -> f64 {
    let r2 = ((a[0] - b[0]) / h.l1).powi(2) + ((a[1] - b[1]) / h.l2).powi(2);
    h.sigma * h.sigma * (-0.5 * r2).exp()
}

fn system(model: &GpModel, h: &Hyperparams) -> (Vec<[f64; 2]>, Vec<f64>, Vec<Vec<f64>>) {
    let xs: Vec<[f64; 2]> = model.dataset.points.iter().map(|p| unit(model, p.0)).collect();
    let ys: Vec<f64> = model.dataset.points.iter().map(|p| (p.1 - model.y_offset) / model.y_scale).collect();
    let noise = h.sigma_noise * h.sigma_noise;
    let k = (0..xs.len()).map(|i| (0..xs.len()).map(|j| se_kernel(xs[i], xs[j], h) + if i == j { noise } else { 0.0 }).collect()).collect();
    (xs, ys, k)
}

/// Posterior mean and standard deviation at `x`, in objective units.
pub fn dense_posterior(model: &GpModel, x: GainSet) -> (f64, f64) {
    let h = model.hyper;
    let (xs, ys, k) = system(model, &h);
    let u = unit(model, x);
    let ks: Vec<f64> = xs.iter().map(|xi| se_kernel(*xi, u, &h)).collect();
    let (sol, _) = dense_solve(k, &[ys, ks.clone()]);
    let mu: f64 = ks.iter().zip(&sol[0]).map(|(a, b)| a * b).sum();
    let var = h.sigma * h.sigma - ks.iter().zip(&sol[1]).map(|(a, b)| a * b).sum::<f64>();
    (model.y_offset + model.y_scale * mu, model.y_scale * var.max(0.0).sqrt())
}

/// Log marginal likelihood of the standardized targets under `h`.
pub fn dense_lml(model: &GpModel, h: &Hyperparams) -> f64 {
    let (_, ys, k) = system(model, h);
    let n = ys.len() as f64;
    let (sol, logdet) = dense_solve(k, std::slice::from_ref(&ys));
    let fit: f64 = ys.iter().zip(&sol[0]).map(|(a, b)| a * b).sum();
    -0.5 * fit - 0.5 * logdet - 0.5 * n * (2.0 * std::f64::consts::PI).ln()
}
