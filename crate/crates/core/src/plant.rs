//! Synthetic hemiplegic walker.
//!
//! Both hips follow a nominal two-harmonic trajectory. The impaired leg loses
//! part of its peak flexion and reaches it late; the healthy leg compensates
//! with reduced extension. Assistive torque and human effort restore the
//! impaired flexion stride by stride, and a slacking law adapts the effort to
//! the remaining error.

use std::f64::consts::{PI, TAU};

use nalgebra::{SMatrix, SVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::controller::TAU_MAX;
use crate::phase::{wrap_half, wrap_unit};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlantError {
    #[error("invalid walker configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WalkerConfig {
    /// Mean stride period (s).
    pub cycle_period: f64,
    pub peak_flexion: f64,
    pub peak_extension: f64,
    pub phi_peak_flexion: f64,
    pub phi_peak_extension: f64,
    /// Impaired-side loss of peak flexion (deg).
    pub flexion_deficit: f64,
    /// Delay of the impaired flexion peak (cycle fraction).
    pub temporal_shift: f64,
    /// Fraction of the impaired flexion deficit mirrored as lost healthy
    /// extension.
    pub coupling_coeff: f64,
    /// Flexion gained per Nm of assistance (deg/Nm).
    pub assist_gain: f64,
    /// Strength with which the assistance pulls the flexion peak in time.
    pub entrainment_gain: f64,
    /// Flexion gained per unit of human effort (deg).
    pub effort_gain: f64,
    /// Per-stride peak amplitude noise (deg).
    pub noise_angle_sd: f64,
    /// Per-stride period noise (s).
    pub noise_period_sd: f64,
    /// Additive noise on every measured sample (deg).
    pub measurement_noise_sd: f64,
    /// Measurement rate (Hz).
    pub sample_rate: f64,
    /// Half-width of the peak-shaping bumps (cycle fraction).
    pub bump_half_width: f64,
    /// Phase span before the flexion peak over which the swing stops
    /// relying on the previous stride's assistance (cycle fraction, 0 turns
    /// anticipation off).
    pub anticipation_ramp: f64,
    /// Exponent flattening the top of the flexion-deficit bump; 1 keeps the
    /// plain raised cosine.
    pub deficit_flatness: f64,
}

impl Default for WalkerConfig {
    fn default() -> Self {
        Self {
            cycle_period: 1.1,
            peak_flexion: 30.0,
            peak_extension: -10.0,
            phi_peak_flexion: 0.88,
            phi_peak_extension: 0.53,
            flexion_deficit: 12.1,
            temporal_shift: 0.029,
            coupling_coeff: 0.7,
            assist_gain: 0.8,
            entrainment_gain: 0.6,
            effort_gain: 1.0,
            noise_angle_sd: 1.0,
            noise_period_sd: 0.02,
            measurement_noise_sd: 0.2,
            sample_rate: 400.0,
            bump_half_width: 0.35,
            anticipation_ramp: 0.15,
            deficit_flatness: 2.0,
        }
    }
}

impl WalkerConfig {
    /// Turns off every noise source.
    pub fn deterministic(mut self) -> Self {
        self.noise_angle_sd = 0.0;
        self.noise_period_sd = 0.0;
        self.measurement_noise_sd = 0.0;
        self
    }

    pub fn validate(&self) -> Result<(), PlantError> {
        let err = |m: String| Err(PlantError::Config(m));
        if !(self.cycle_period > 0.0) {
            return err(format!("cycle_period must be > 0, got {}", self.cycle_period));
        }
        if !(self.peak_flexion > self.peak_extension) {
            return err("peak_flexion must exceed peak_extension".into());
        }
        if !(0.0..=1.0).contains(&self.coupling_coeff) {
            return err(format!("coupling_coeff must be in [0, 1], got {}", self.coupling_coeff));
        }
        for (name, v) in [("phi_peak_flexion", self.phi_peak_flexion), ("phi_peak_extension", self.phi_peak_extension)] {
            if !(0.0..1.0).contains(&v) {
                return err(format!("{name} must be in [0, 1), got {v}"));
            }
        }
        let sep = wrap_half(self.phi_peak_flexion - self.phi_peak_extension).abs();
        if !(self.bump_half_width > 0.0 && self.bump_half_width <= sep) {
            return err(format!("bump_half_width must be in (0, {sep}] so the peak bumps do not overlap the other peak"));
        }
        let swing = wrap_unit(self.phi_peak_flexion - self.phi_peak_extension);
        if !(self.anticipation_ramp >= 0.0 && self.anticipation_ramp <= swing) {
            return err(format!("anticipation_ramp must be in [0, {swing}], got {}", self.anticipation_ramp));
        }
        if !(self.temporal_shift.abs() < 0.2) {
            return err(format!("temporal_shift must be within +-0.2, got {}", self.temporal_shift));
        }
        let nonneg = [
            ("flexion_deficit", self.flexion_deficit),
            ("assist_gain", self.assist_gain),
            ("entrainment_gain", self.entrainment_gain),
            ("effort_gain", self.effort_gain),
            ("noise_angle_sd", self.noise_angle_sd),
            ("noise_period_sd", self.noise_period_sd),
            ("measurement_noise_sd", self.measurement_noise_sd),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0 && v.is_finite()) {
                return err(format!("{name} must be >= 0, got {v}"));
            }
        }
        if !(self.sample_rate > 0.0) {
            return err(format!("sample_rate must be > 0, got {}", self.sample_rate));
        }
        if self.noise_period_sd * 4.0 >= self.cycle_period {
            return err("noise_period_sd too large for cycle_period".into());
        }
        NominalCurve::fit(self).map(|_| ())
    }
}

/// Human adaptation constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HumanConfig {
    pub enabled: bool,
    /// Per-stride retention of effort.
    pub slacking_factor: f64,
    /// Effort gained per degree of flexion error.
    pub learning_gain: f64,
    pub u_max: f64,
    /// Hip flexion moment at zero effort (Nm/kg).
    pub tau_base: f64,
    /// Relative moment increase per unit effort.
    pub k_u: f64,
    /// Error scale beyond which the walker stops engaging with the error
    /// (deg). Infinite disables disengagement.
    pub disengage_error: f64,
}

impl Default for HumanConfig {
    fn default() -> Self {
        Self { enabled: true, slacking_factor: 0.95, learning_gain: 0.2, u_max: 5.0, tau_base: 0.8, k_u: 0.25, disengage_error: 1.5 }
    }
}

impl HumanConfig {
    pub fn validate(&self) -> Result<(), PlantError> {
        let err = |m: String| Err(PlantError::Config(m));
        if !(0.0..1.0).contains(&self.slacking_factor) {
            return err(format!("slacking_factor must be in [0, 1), got {}", self.slacking_factor));
        }
        if !(self.learning_gain > 0.0) {
            return err("learning_gain must be > 0".into());
        }
        if !(self.u_max > 0.0) {
            return err("u_max must be > 0".into());
        }
        if !(self.tau_base > 0.0) {
            return err("tau_base must be > 0".into());
        }
        if !(self.k_u >= 0.0) {
            return err("k_u must be >= 0".into());
        }
        if !(self.disengage_error > 0.0) {
            return err("disengage_error must be > 0".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HumanState {
    pub u_h: f64,
    pub tau_hip_peak: f64,
    pub stride_index: usize,
}

impl HumanState {
    pub fn new(cfg: &HumanConfig) -> Self {
        Self { u_h: 0.0, tau_hip_peak: cfg.tau_base, stride_index: 0 }
    }
}

/// Error-driven effort update with slacking:
/// `u <- clamp(f_s u + g_e e+ exp(-e+ / e_g), 0, u_max)`.
pub fn human_adaptation_update(h: HumanState, e_theta_fle: f64, cfg: &HumanConfig) -> HumanState {
    let e = e_theta_fle.max(0.0);
    let drive = cfg.learning_gain * e * (-e / cfg.disengage_error).exp();
    let u_h = (cfg.slacking_factor * h.u_h + drive).clamp(0.0, cfg.u_max);
    HumanState { u_h, tau_hip_peak: cfg.tau_base * (1.0 + cfg.k_u * u_h), stride_index: h.stride_index + 1 }
}

/// Two-harmonic periodic hip trajectory through prescribed peaks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NominalCurve {
    /// `[c0, a1, b1, a2, b2]`.
    pub coeffs: [f64; 5],
}

fn basis(p: f64) -> [f64; 5] {
    let (s1, c1) = (TAU * p).sin_cos();
    let (s2, c2) = (2.0 * TAU * p).sin_cos();
    [1.0, c1, s1, c2, s2]
}

fn dbasis(p: f64) -> [f64; 5] {
    let (s1, c1) = (TAU * p).sin_cos();
    let (s2, c2) = (2.0 * TAU * p).sin_cos();
    [0.0, -TAU * s1, TAU * c1, -2.0 * TAU * s2, 2.0 * TAU * c2]
}

impl NominalCurve {
    /// Fits the coefficients with the least second-harmonic energy that put
    /// stationary points of the requested heights at the two peak phases,
    /// then checks that those are the global extrema.
    pub fn fit(cfg: &WalkerConfig) -> Result<Self, PlantError> {
        let (pf, pe) = (cfg.phi_peak_flexion, cfg.phi_peak_extension);
        let rows = [basis(pf), basis(pe), dbasis(pf), dbasis(pe)];
        // KKT system of: minimize a2^2 + b2^2 subject to the four constraints.
        let mut kkt = SMatrix::<f64, 9, 9>::zeros();
        kkt[(3, 3)] = 2.0;
        kkt[(4, 4)] = 2.0;
        for (i, row) in rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                kkt[(5 + i, j)] = *v;
                kkt[(j, 5 + i)] = *v;
            }
        }
        let mut rhs = SVector::<f64, 9>::zeros();
        rhs[5] = cfg.peak_flexion;
        rhs[6] = cfg.peak_extension;
        let x = kkt.lu().solve(&rhs).ok_or_else(|| PlantError::Config("peak constraints are degenerate".into()))?;
        let curve = NominalCurve { coeffs: [x[0], x[1], x[2], x[3], x[4]] };

        let n = 4000;
        let (mut hi, mut lo) = (f64::NEG_INFINITY, f64::INFINITY);
        for k in 0..n {
            let v = curve.eval(k as f64 / n as f64);
            hi = hi.max(v);
            lo = lo.min(v);
        }
        let residual = (curve.eval(pf) - cfg.peak_flexion)
            .abs()
            .max((curve.eval(pe) - cfg.peak_extension).abs())
            .max(hi - cfg.peak_flexion)
            .max(cfg.peak_extension - lo);
        if !(residual <= 0.5) {
            return Err(PlantError::Config(format!("nominal trajectory cannot meet the peak constraints (residual {residual:.3} deg)")));
        }
        Ok(curve)
    }

    pub fn eval(&self, p: f64) -> f64 {
        basis(p).iter().zip(&self.coeffs).map(|(b, c)| b * c).sum()
    }
}

/// Nominal hip angle at phase `phi`.
pub fn nominal_trajectory(phi: f64, cfg: &WalkerConfig) -> Result<f64, PlantError> {
    Ok(NominalCurve::fit(cfg)?.eval(phi))
}

/// Raised-cosine bump of half-width `h` centred at `c`, on the circle.
fn bump(p: f64, c: f64, h: f64) -> f64 {
    flat_bump(p, c, h, 1.0)
}

/// Raised cosine of `(|d| / h)^k`; `k > 1` widens the top while keeping the
/// value and slope continuous at the edges.
fn flat_bump(p: f64, c: f64, h: f64, k: f64) -> f64 {
    let x = wrap_half(p - c).abs() / h;
    if x >= 1.0 {
        0.0
    } else {
        (0.5 * PI * x.powf(k)).cos().powi(2)
    }
}

/// Ground truth for one completed impaired stride.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantStride {
    pub index: usize,
    pub theta_pf_imp: f64,
    pub theta_pf_hlth: f64,
    /// Largest actual torque applied during the stride (Nm).
    pub f_applied: f64,
    /// Delay of the impaired flexion peak as it passed (cycle fraction).
    pub shift: f64,
    pub u_h: f64,
    pub tau_hip_peak: f64,
}

/// One measured sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantSample {
    pub t: f64,
    pub theta_imp: f64,
    pub theta_hlth: f64,
    /// Set when an impaired stride completed on this step.
    pub stride: Option<PlantStride>,
}

#[derive(Debug, Clone)]
pub struct Plant {
    cfg: WalkerConfig,
    human_cfg: HumanConfig,
    curve: NominalCurve,
    rng: ChaCha8Rng,
    impaired: bool,
    t: f64,
    /// Healthy-leg true phase; the impaired leg runs half a cycle ahead.
    phase: f64,
    period: f64,
    human: HumanState,
    // Impaired flexion stride.
    noise_f_imp: f64,
    f_run: f64,
    f_prev: f64,
    pull_prev: f64,
    tau_c: f64,
    tau_s: f64,
    tau_sum: f64,
    shift: f64,
    peak_shift: f64,
    // Impaired extension and healthy flexion/extension.
    noise_e_imp: f64,
    noise_f_hlth: f64,
    amp_e_hlth: f64,
    last_deficit: f64,
    stride_index: usize,
}

impl Plant {
    pub fn new(cfg: WalkerConfig, human_cfg: HumanConfig, seed: u64) -> Result<Self, PlantError> {
        cfg.validate()?;
        human_cfg.validate()?;
        let curve = NominalCurve::fit(&cfg)?;
        let mut plant = Self {
            human: HumanState::new(&human_cfg),
            period: cfg.cycle_period,
            curve,
            rng: ChaCha8Rng::seed_from_u64(seed),
            impaired: true,
            t: 0.0,
            phase: 0.0,
            noise_f_imp: 0.0,
            f_run: 0.0,
            f_prev: 0.0,
            pull_prev: 0.0,
            tau_c: 0.0,
            tau_s: 0.0,
            tau_sum: 0.0,
            shift: 0.0,
            peak_shift: 0.0,
            noise_e_imp: 0.0,
            noise_f_hlth: 0.0,
            amp_e_hlth: 0.0,
            last_deficit: 0.0,
            stride_index: 0,
            cfg,
            human_cfg,
        };
        plant.last_deficit = plant.deficit();
        plant.amp_e_hlth = plant.coupled_extension();
        plant.shift = plant.base_shift();
        Ok(plant)
    }

    pub fn config(&self) -> &WalkerConfig {
        &self.cfg
    }

    pub fn curve(&self) -> &NominalCurve {
        &self.curve
    }

    pub fn human(&self) -> &HumanState {
        &self.human
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.cfg.sample_rate
    }

    pub fn is_impaired(&self) -> bool {
        self.impaired
    }

    /// Switches the impairment on or off; takes effect stride by stride.
    pub fn set_impaired(&mut self, on: bool) {
        self.impaired = on;
    }

    /// True phase of the healthy leg.
    pub fn phase_hlth(&self) -> f64 {
        self.phase
    }

    /// True phase of the impaired leg.
    pub fn phase_imp(&self) -> f64 {
        wrap_unit(self.phase + 0.5)
    }

    fn gauss(&mut self, sd: f64) -> f64 {
        if sd == 0.0 {
            return 0.0;
        }
        Normal::new(0.0, sd).map(|n| n.sample(&mut self.rng)).unwrap_or(0.0)
    }

    fn nominal_deficit(&self) -> f64 {
        if self.impaired {
            self.cfg.flexion_deficit
        } else {
            0.0
        }
    }

    /// Current effective flexion deficit of the impaired leg (deg), before
    /// stride noise.
    fn deficit(&self) -> f64 {
        self.deficit_with(self.f_run)
    }

    fn deficit_with(&self, assist: f64) -> f64 {
        self.nominal_deficit() - self.cfg.assist_gain * assist - self.cfg.effort_gain * self.human.u_h
    }

    /// Weight of the previous stride's assistance in the current swing: 1
    /// early in the stride, fading to 0 at the flexion peak.
    fn anticipation(&self) -> f64 {
        let r = self.cfg.anticipation_ramp;
        if r <= 0.0 {
            return 0.0;
        }
        let pe = self.cfg.phi_peak_extension;
        let u = wrap_unit(self.phase_imp() - pe);
        let peak = wrap_unit(self.cfg.phi_peak_flexion - pe);
        if u >= peak {
            0.0
        } else if u <= peak - r {
            1.0
        } else {
            (0.5 * PI * (u - peak + r) / r).cos().powi(2)
        }
    }

    /// Assistance level shaping the swing so far: the torque felt this
    /// stride, topped up by the expectation carried over from the last one.
    fn assist_level(&self) -> f64 {
        self.f_run + (self.f_prev - self.f_run).max(0.0) * self.anticipation()
    }

    fn coupled_extension(&self) -> f64 {
        self.cfg.coupling_coeff * self.last_deficit.max(0.0)
    }

    fn base_shift(&self) -> f64 {
        let d = self.nominal_deficit();
        if !self.impaired || d == 0.0 {
            return 0.0;
        }
        self.cfg.temporal_shift * (self.deficit_with(self.assist_level()).max(0.0) / d)
    }

    fn update_shift(&mut self) {
        let base = self.base_shift();
        let k = (self.cfg.entrainment_gain * self.assist_level() / TAU_MAX).clamp(0.0, 1.0);
        let pull = self.torque_pull().unwrap_or(self.pull_prev);
        self.shift = if k == 0.0 { base } else { (1.0 - k) * base + k * pull };
    }

    /// Offset of this stride's torque centroid from the flexion peak, if the
    /// torque so far has a clear centre.
    fn torque_pull(&self) -> Option<f64> {
        let resultant = self.tau_c.hypot(self.tau_s);
        if self.tau_sum <= 0.0 || resultant < 0.1 * self.tau_sum {
            return None;
        }
        let centroid = wrap_unit(self.tau_s.atan2(self.tau_c) / TAU);
        Some(wrap_half(centroid - self.cfg.phi_peak_flexion))
    }

    fn theta_imp_at(&self, p: f64) -> f64 {
        let h = self.cfg.bump_half_width;
        let pf = self.cfg.phi_peak_flexion;
        let q = p - self.shift * bump(p, pf, h);
        let amp_f = -self.deficit_with(self.assist_level()) + self.noise_f_imp;
        self.curve.eval(q)
            + amp_f * flat_bump(q, pf, h, self.cfg.deficit_flatness)
            + self.noise_e_imp * bump(p, self.cfg.phi_peak_extension, h)
    }

    fn theta_hlth_at(&self, p: f64) -> f64 {
        let h = self.cfg.bump_half_width;
        self.curve.eval(p)
            + self.noise_f_hlth * bump(p, self.cfg.phi_peak_flexion, h)
            + self.amp_e_hlth * bump(p, self.cfg.phi_peak_extension, h)
    }

    /// Noise-free angles of both legs at the current state.
    pub fn true_angles(&self) -> (f64, f64) {
        (self.theta_imp_at(self.phase_imp()), self.theta_hlth_at(self.phase))
    }

    /// Advances one measurement period with `tau_actual` applied to the
    /// impaired hip.
    pub fn step(&mut self, tau_actual: f64) -> PlantSample {
        let dt = self.dt();
        let tau = tau_actual.clamp(0.0, TAU_MAX);
        let old_h = self.phase;
        let old_i = self.phase_imp();
        self.phase = wrap_unit(self.phase + dt / self.period);
        self.t += dt;
        let new_i = self.phase_imp();
        let crossed = |old: f64, new: f64, at: f64| wrap_unit(new - at) < wrap_unit(old - at) && wrap_unit(new - old) < 0.5;

        let mut stride = None;
        if crossed(old_h, self.phase, 0.0) {
            let jitter = self.gauss(self.cfg.noise_period_sd);
            self.period = (self.cfg.cycle_period + jitter).max(0.5 * self.cfg.cycle_period);
        }
        // Healthy flexion noise switches where its bump vanishes.
        if crossed(old_h, self.phase, self.cfg.phi_peak_extension) {
            self.noise_f_hlth = self.gauss(self.cfg.noise_angle_sd);
        }
        if crossed(old_h, self.phase, self.cfg.phi_peak_flexion) {
            self.amp_e_hlth = self.coupled_extension() + self.gauss(self.cfg.noise_angle_sd);
        }
        if crossed(old_i, new_i, self.cfg.phi_peak_flexion) {
            self.noise_e_imp = self.gauss(self.cfg.noise_angle_sd);
            self.peak_shift = self.shift;
        }
        if crossed(old_i, new_i, self.cfg.phi_peak_extension) {
            stride = Some(self.finish_impaired_stride());
        }

        if tau > 0.0 {
            self.f_run = self.f_run.max(tau);
            let (s, c) = (TAU * new_i).sin_cos();
            self.tau_c += tau * c;
            self.tau_s += tau * s;
            self.tau_sum += tau;
        }
        self.update_shift();

        let (ti, th) = self.true_angles();
        let sd = self.cfg.measurement_noise_sd;
        PlantSample { t: self.t, theta_imp: ti + self.gauss(sd), theta_hlth: th + self.gauss(sd), stride }
    }

    fn finish_impaired_stride(&mut self) -> PlantStride {
        let nom = self.cfg.peak_flexion;
        let theta_pf_imp = nom - self.deficit() + self.noise_f_imp;
        let theta_pf_hlth = nom + self.noise_f_hlth;
        let f_applied = self.f_run;
        let shift = self.peak_shift;
        self.last_deficit = self.deficit();

        if self.human_cfg.enabled {
            self.human = human_adaptation_update(self.human, theta_pf_hlth - theta_pf_imp, &self.human_cfg);
        }
        let out = PlantStride {
            index: self.stride_index,
            theta_pf_imp,
            theta_pf_hlth,
            f_applied,
            shift,
            u_h: self.human.u_h,
            tau_hip_peak: self.human.tau_hip_peak,
        };
        self.stride_index += 1;
        self.f_prev = self.f_run;
        self.pull_prev = self.torque_pull().unwrap_or(0.0);
        self.f_run = 0.0;
        self.tau_c = 0.0;
        self.tau_s = 0.0;
        self.tau_sum = 0.0;
        self.noise_f_imp = self.gauss(self.cfg.noise_angle_sd);
        self.update_shift();
        out
    }
}
