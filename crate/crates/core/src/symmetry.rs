//! Stride-level peak statistics, symmetry errors and session gait metrics.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::phase::{circular_mean, wrap_half, wrap_unit};
use crate::Side;

/// Number of points on the common phase grid used for SI_TOA.
pub const GRID_POINTS: usize = 200;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymmetryError {
    #[error("no stride history to estimate peaks from")]
    NoEstimate,
    #[error("peak phases cancel out; circular mean undefined")]
    PhaseUndefined,
    #[error("need at least {needed} strides per side, got {got}")]
    InsufficientStrides { needed: usize, got: usize },
    #[error("healthy trajectory has zero variance; SI_TOA undefined")]
    SiToaUndefined,
    #[error("reference hip moment is zero; HPI undefined")]
    HpiUndefined,
    #[error("stride has no samples to resample")]
    EmptyStride,
}

/// Peak angles and phases of one stride of one leg.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrideRecord {
    pub index: usize,
    pub side: Side,
    /// Peak hip flexion (deg).
    pub theta_pf: f64,
    /// Phase of peak flexion.
    pub phi_pf: f64,
    /// Peak hip extension (deg).
    pub theta_pe: f64,
    /// Phase of peak extension.
    pub phi_pe: f64,
    /// Peak hip flexion moment (Nm/kg), when known.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_hip_peak: Option<f64>,
}

/// Averaged peak estimate for one leg.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakEstimate {
    pub theta_pf: f64,
    pub phi_pf: f64,
    pub theta_pe: f64,
    pub phi_pe: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SymmetryErrors {
    pub e_theta_fle: f64,
    pub e_phi_fle: f64,
    pub e_theta_ex: f64,
    pub e_phi_ex: f64,
}

/// Session-level gait metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaitMetrics {
    pub sap_fle: f64,
    pub sap_ex: f64,
    pub tap_fle: f64,
    pub tap_ex: f64,
    pub si_rom: f64,
    pub si_toa: f64,
    pub hpi: f64,
}

/// Averages the last `n_s` strides: arithmetic mean for angles, circular
/// mean for phases.
pub fn estimate_peaks(history: &[StrideRecord], n_s: usize) -> Result<PeakEstimate, SymmetryError> {
    if history.is_empty() || n_s == 0 {
        return Err(SymmetryError::NoEstimate);
    }
    let tail = &history[history.len().saturating_sub(n_s)..];
    let n = tail.len() as f64;
    let mean = |f: fn(&StrideRecord) -> f64| tail.iter().map(f).sum::<f64>() / n;
    let cmean = |f: fn(&StrideRecord) -> f64| circular_mean(tail.iter().map(f)).ok_or(SymmetryError::PhaseUndefined);
    Ok(PeakEstimate {
        theta_pf: mean(|r| r.theta_pf),
        phi_pf: cmean(|r| r.phi_pf)?,
        theta_pe: mean(|r| r.theta_pe),
        phi_pe: cmean(|r| r.phi_pe)?,
    })
}

/// Healthy minus impaired, with phase differences wrapped into `(-0.5, 0.5]`.
pub fn symmetry_errors(hlth: &PeakEstimate, imp: &PeakEstimate) -> SymmetryErrors {
    SymmetryErrors {
        e_theta_fle: hlth.theta_pf - imp.theta_pf,
        e_phi_fle: wrap_half(hlth.phi_pf - imp.phi_pf),
        e_theta_ex: hlth.theta_pe - imp.theta_pe,
        e_phi_ex: wrap_half(hlth.phi_pe - imp.phi_pe),
    }
}

/// Linearly interpolates a stride's `(phase, angle)` samples onto a uniform
/// grid of `n` phases in `[0, 1)`, treating phase as circular.
pub fn resample_to_grid(samples: &[(f64, f64)], n: usize) -> Result<Vec<f64>, SymmetryError> {
    if samples.is_empty() {
        return Err(SymmetryError::EmptyStride);
    }
    let mut pts: Vec<(f64, f64)> = samples.iter().map(|&(p, th)| (wrap_unit(p), th)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts.dedup_by(|b, a| b.0 == a.0);
    if pts.len() == 1 {
        return Ok(vec![pts[0].1; n]);
    }
    let first = pts[0];
    let last = pts[pts.len() - 1];
    let mut out = Vec::with_capacity(n);
    let mut j = 0;
    for k in 0..n {
        let p = k as f64 / n as f64;
        while j < pts.len() && pts[j].0 <= p {
            j += 1;
        }
        let (lo, hi) = if j == 0 {
            ((last.0 - 1.0, last.1), first)
        } else if j == pts.len() {
            (last, (first.0 + 1.0, first.1))
        } else {
            (pts[j - 1], pts[j])
        };
        let w = if hi.0 > lo.0 { (p - lo.0) / (hi.0 - lo.0) } else { 0.0 };
        out.push(lo.1 + w * (hi.1 - lo.1));
    }
    Ok(out)
}

fn variance(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let (n, s) = xs.clone().fold((0usize, 0.0), |(n, s), x| (n + 1, s + x));
    if n == 0 {
        return 0.0;
    }
    let m = s / n as f64;
    xs.map(|x| (x - m) * (x - m)).sum::<f64>() / n as f64
}

/// `1 - var(hlth - imp) / var(hlth)` over paired grid samples.
pub fn si_toa(hlth: &[f64], imp: &[f64]) -> Result<f64, SymmetryError> {
    let n = hlth.len().min(imp.len());
    let vh = variance(hlth[..n].iter().copied());
    if vh <= 0.0 || !vh.is_finite() {
        return Err(SymmetryError::SiToaUndefined);
    }
    let vr = variance(hlth[..n].iter().zip(&imp[..n]).map(|(h, i)| h - i));
    Ok(1.0 - vr / vh)
}

/// Percent asymmetry of the range of motion, healthy relative to impaired.
pub fn si_rom(rom_hlth: f64, rom_imp: f64) -> f64 {
    let avg = 0.5 * (rom_hlth + rom_imp);
    if avg == 0.0 {
        return 0.0;
    }
    (rom_hlth - rom_imp) / avg * 100.0
}

/// Mean peak hip flexion moment over strides that carry one.
pub fn mean_hip_moment(strides: &[StrideRecord]) -> Option<f64> {
    let vals: Vec<f64> = strides.iter().filter_map(|s| s.tau_hip_peak).collect();
    (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
}

/// Everything [`compute_metrics`] needs from one session.
#[derive(Debug, Clone, Copy)]
pub struct SessionData<'a> {
    pub hlth: &'a [StrideRecord],
    pub imp: &'a [StrideRecord],
    /// Per-stride healthy trajectories on the common phase grid.
    pub hlth_grids: &'a [Vec<f64>],
    /// Per-stride impaired trajectories on the common phase grid.
    pub imp_grids: &'a [Vec<f64>],
    /// Mean peak hip moment of the unimpaired reference session.
    pub hpi_reference: f64,
}

pub const MIN_METRIC_STRIDES: usize = 10;

pub fn compute_metrics(data: SessionData<'_>) -> Result<GaitMetrics, SymmetryError> {
    let got = data.hlth.len().min(data.imp.len());
    if got < MIN_METRIC_STRIDES {
        return Err(SymmetryError::InsufficientStrides { needed: MIN_METRIC_STRIDES, got });
    }
    if data.hpi_reference == 0.0 || !data.hpi_reference.is_finite() {
        return Err(SymmetryError::HpiUndefined);
    }
    let h = estimate_peaks(data.hlth, data.hlth.len())?;
    let i = estimate_peaks(data.imp, data.imp.len())?;
    let e = symmetry_errors(&h, &i);

    let pairs = data.hlth_grids.len().min(data.imp_grids.len());
    let hpool: Vec<f64> = data.hlth_grids[..pairs].iter().flatten().copied().collect();
    let ipool: Vec<f64> = data.imp_grids[..pairs].iter().flatten().copied().collect();
    let toa = si_toa(&hpool, &ipool)?;

    let tau = mean_hip_moment(data.imp).unwrap_or(0.0);
    Ok(GaitMetrics {
        sap_fle: e.e_theta_fle,
        sap_ex: e.e_theta_ex,
        tap_fle: 100.0 * e.e_phi_fle,
        tap_ex: 100.0 * e.e_phi_ex,
        si_rom: si_rom(h.theta_pf - h.theta_pe, i.theta_pf - i.theta_pe),
        si_toa: toa,
        hpi: tau / data.hpi_reference,
    })
}

/// A completed stride of one leg: peak record plus its grid trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Stride {
    pub record: StrideRecord,
    pub grid: Vec<f64>,
}

/// Cuts a leg's `(phase, angle)` stream into strides at a fixed split phase
/// and extracts the peaks of each stride.
#[derive(Debug, Clone)]
pub struct StrideSegmenter {
    side: Side,
    split: f64,
    min_samples: usize,
    prev_rel: Option<f64>,
    started: bool,
    samples: Vec<(f64, f64)>,
    count: usize,
}

impl StrideSegmenter {
    /// `split` is the phase at which strides are cut; it should be far from
    /// both peaks. Segments shorter than `min_samples` are merged into the
    /// next one.
    pub fn new(side: Side, split: f64, min_samples: usize) -> Self {
        Self { side, split, min_samples, prev_rel: None, started: false, samples: Vec::new(), count: 0 }
    }

    pub fn side(&self) -> Side {
        self.side
    }

    /// Drops the partial stride in progress; the next crossing starts fresh.
    pub fn reset(&mut self) {
        self.prev_rel = None;
        self.started = false;
        self.samples.clear();
    }

    pub fn push(&mut self, phi: f64, theta: f64) -> Option<Stride> {
        let rel = wrap_unit(phi - self.split);
        let crossed = matches!(self.prev_rel, Some(p) if p - rel > 0.5);
        self.prev_rel = Some(rel);
        let mut out = None;
        if crossed {
            if self.started && self.samples.len() >= self.min_samples {
                out = self.finish();
                self.samples.clear();
            } else if !self.started {
                self.started = true;
                self.samples.clear();
            }
        }
        if self.started {
            self.samples.push((phi, theta));
        }
        out
    }

    fn finish(&mut self) -> Option<Stride> {
        let &(phi_pf, theta_pf) = self.samples.iter().max_by(|a, b| a.1.total_cmp(&b.1))?;
        let &(phi_pe, theta_pe) = self.samples.iter().min_by(|a, b| a.1.total_cmp(&b.1))?;
        let grid = resample_to_grid(&self.samples, GRID_POINTS).ok()?;
        let record = StrideRecord {
            index: self.count,
            side: self.side,
            theta_pf,
            phi_pf: wrap_unit(phi_pf),
            theta_pe,
            phi_pe: wrap_unit(phi_pe),
            tau_hip_peak: None,
        };
        self.count += 1;
        Some(Stride { record, grid })
    }
}
