//! Per-cycle assistive torque generation for the impaired leg.
//!
//! Magnitude and timing are learned stride to stride from the spatial and
//! temporal symmetry errors; within a stride the command follows a smooth
//! unimodal bump in gait phase.

use serde::{Deserialize, Serialize};

use crate::phase::wrap_half;

/// Hardware torque limit (Nm).
pub const TAU_MAX: f64 = 19.8;

/// Half-width of the safety interval around the initial start phase.
pub const START_PHASE_CLAMP: f64 = 0.05;

/// Control gains tuned by the optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainSet {
    /// Magnitude gain (Nm/deg).
    pub k_theta: f64,
    /// Start-phase gain (cycle fraction per cycle fraction).
    pub k_phi: f64,
}

impl GainSet {
    pub const ZERO: GainSet = GainSet { k_theta: 0.0, k_phi: 0.0 };

    pub fn new(k_theta: f64, k_phi: f64) -> Self {
        Self { k_theta, k_phi }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurveConfig {
    /// Slope of the tanh edges.
    pub a: f64,
    /// Rise duration from onset to peak (cycle fraction).
    pub d_phi_rise: f64,
    /// Initial onset phase (cycle fraction).
    pub phi_start_init: f64,
}

impl Default for CurveConfig {
    fn default() -> Self {
        Self { a: 10.0, d_phi_rise: 0.25, phi_start_init: 0.73 }
    }
}

impl CurveConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(format!("curve.a must be > 0, got {}", self.a));
        }
        if !(self.d_phi_rise > 0.0 && self.d_phi_rise < 0.5) {
            return Err(format!("curve.d_phi_rise must be in (0, 0.5), got {}", self.d_phi_rise));
        }
        if !(0.0..1.0).contains(&self.phi_start_init) {
            return Err(format!("curve.phi_start_init must be in [0, 1), got {}", self.phi_start_init));
        }
        Ok(())
    }
}

/// Learning-rate and actuator settings of the stride-level controller.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IlcConfig {
    pub lambda_theta: f64,
    pub lambda_phi: f64,
    /// Number of strides averaged into the peak estimates.
    pub n_s: usize,
    pub tau_max: f64,
    /// Time constant of the actuator lag (s).
    pub actuator_lag: f64,
}

impl Default for IlcConfig {
    fn default() -> Self {
        Self { lambda_theta: 0.98, lambda_phi: 0.9, n_s: 5, tau_max: TAU_MAX, actuator_lag: 0.02 }
    }
}

impl IlcConfig {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [("lambda_theta", self.lambda_theta), ("lambda_phi", self.lambda_phi)] {
            if !(0.0..1.0).contains(&v) {
                return Err(format!("ilc.{name} must be in [0, 1), got {v}"));
            }
        }
        if self.n_s == 0 {
            return Err("ilc.n_s must be >= 1".into());
        }
        if !(self.tau_max > 0.0 && self.tau_max <= TAU_MAX) {
            return Err(format!("ilc.tau_max must be in (0, {TAU_MAX}], got {}", self.tau_max));
        }
        if !(self.actuator_lag >= 0.0 && self.actuator_lag.is_finite()) {
            return Err(format!("ilc.actuator_lag must be >= 0, got {}", self.actuator_lag));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssistState {
    /// Learned torque magnitude (Nm).
    pub f_mag: f64,
    /// Torque onset phase.
    pub phi_start: f64,
    pub cycle_index: usize,
    /// False for a cycle whose spatial error was negative: no torque is
    /// commanded even though `f_mag` keeps its decayed value.
    pub enabled: bool,
}

impl AssistState {
    pub fn new(cfg: &CurveConfig) -> Self {
        Self { f_mag: 0.0, phi_start: cfg.phi_start_init, cycle_index: 0, enabled: true }
    }

    /// Magnitude actually commanded this cycle.
    pub fn commanded_magnitude(&self) -> f64 {
        if self.enabled {
            self.f_mag
        } else {
            0.0
        }
    }
}

/// Forgetting-factor P-type update of the torque magnitude.
pub fn update_magnitude(state: AssistState, e_theta_fle: f64, lambda_theta: f64, gains: GainSet, tau_max: f64) -> AssistState {
    let enabled = e_theta_fle >= 0.0;
    let drive = if enabled { gains.k_theta * e_theta_fle } else { 0.0 };
    let f = lambda_theta * state.f_mag + (1.0 - lambda_theta) * drive;
    AssistState { f_mag: f.clamp(0.0, tau_max), enabled, cycle_index: state.cycle_index + 1, ..state }
}

/// Forgetting-factor update of the onset phase, clamped to the safety band.
pub fn update_start_phase(state: AssistState, e_phi_fle: f64, lambda_phi: f64, gains: GainSet, cfg: &CurveConfig) -> AssistState {
    let init = cfg.phi_start_init;
    let p = lambda_phi * state.phi_start + (1.0 - lambda_phi) * (init - gains.k_phi * e_phi_fle);
    AssistState { phi_start: p.clamp(init - START_PHASE_CLAMP, init + START_PHASE_CLAMP), ..state }
}

/// Bump shape as a function of normalized phase `kappa`, peaking at 1.
pub fn curve_shape(kappa: f64, a: f64) -> f64 {
    0.5 * ((a * (kappa - 0.5)).tanh() - (a * (kappa - 1.5)).tanh())
}

/// Unimodal torque profile in `[0, tanh(a/2)]`, periodic in `phi`.
///
/// The phase offset is wrapped to within half a cycle of the peak at
/// `phi_start + d_phi_rise`, so the profile is symmetric and continuous
/// around the circle.
pub fn torque_curve(phi: f64, phi_start: f64, cfg: &CurveConfig) -> f64 {
    let d = wrap_half(phi - phi_start - cfg.d_phi_rise);
    curve_shape(1.0 + d / cfg.d_phi_rise, cfg.a)
}

/// Desired assistive torque at impaired-leg phase `phi_imp` (Nm).
pub fn assistive_torque(phi_imp: f64, state: &AssistState, cfg: &CurveConfig) -> f64 {
    let m = state.commanded_magnitude();
    if m == 0.0 {
        return 0.0;
    }
    m * torque_curve(phi_imp, state.phi_start, cfg)
}

/// One exact step of a first-order lag toward `tau_d`.
pub fn actuator_response(tau_d: f64, tau_actual_prev: f64, dt: f64, tau_lag: f64) -> f64 {
    if tau_lag <= 0.0 {
        return tau_d;
    }
    tau_actual_prev + (tau_d - tau_actual_prev) * (-(-dt / tau_lag).exp_m1())
}
