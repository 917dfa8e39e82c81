//! Gait phase estimation with adaptive oscillators.
//!
//! Each leg runs its own oscillator that entrains phase, frequency and a
//! truncated Fourier series to the measured hip angle. Landmark events taken
//! from the inter-leg angle difference anchor the raw oscillator phase to the
//! gait cycle through a decaying phase-offset correction.

use std::collections::VecDeque;
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::phase::{wrap_half, wrap_unit};
use crate::Side;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OscillatorError {
    #[error("non-finite hip angle sample ({0})")]
    SignalFault(f64),
    #[error("invalid oscillator configuration: {0}")]
    Config(String),
}

/// Adaptive oscillator gains and integration settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AoConfig {
    /// Phase coupling gain (1/(deg s)).
    pub psi_phase: f64,
    /// Frequency coupling gain (rad/(deg s^2)).
    pub psi_freq: f64,
    /// Fourier coefficient learning gain (1/s).
    pub epsilon: f64,
    /// Number of Fourier pairs beyond the constant term.
    pub n_f: usize,
    /// Gain of the landmark-driven phase offset correction (1/s).
    pub k_sync: f64,
    /// Integration step (s).
    pub dt: f64,
    /// Initial intrinsic frequency (rad/s).
    pub omega_init: f64,
    /// Lower bound on the intrinsic frequency (rad/s).
    pub omega_floor: f64,
}

impl Default for AoConfig {
    fn default() -> Self {
        Self {
            psi_phase: 0.5,
            psi_freq: 0.5,
            epsilon: 1.5,
            n_f: 6,
            k_sync: 2.0,
            dt: 1.0 / 250.0,
            omega_init: TAU * 0.9,
            omega_floor: TAU * 0.2,
        }
    }
}

impl AoConfig {
    pub fn validate(&self) -> Result<(), OscillatorError> {
        let positive = [
            ("psi_phase", self.psi_phase),
            ("psi_freq", self.psi_freq),
            ("epsilon", self.epsilon),
            ("k_sync", self.k_sync),
            ("dt", self.dt),
            ("omega_init", self.omega_init),
            ("omega_floor", self.omega_floor),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(OscillatorError::Config(format!("{name} must be > 0, got {v}")));
            }
        }
        if self.n_f < 1 {
            return Err(OscillatorError::Config("n_f must be >= 1".into()));
        }
        if self.omega_init < self.omega_floor {
            return Err(OscillatorError::Config("omega_init below omega_floor".into()));
        }
        Ok(())
    }
}

/// State of one adaptive oscillator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillatorState {
    /// Oscillator phase (rad), kept in `[0, 2pi)`.
    pub rho: f64,
    /// Intrinsic frequency (rad/s).
    pub omega: f64,
    /// Cosine coefficients, `n_f + 1` entries (deg).
    pub alpha: Vec<f64>,
    /// Sine coefficients, `n_f + 1` entries (deg).
    pub beta: Vec<f64>,
    /// Reconstructed hip angle at the current `rho` (deg).
    pub theta_rec: f64,
    /// Phase correction offset (cycle fraction).
    pub delta_phi: f64,
    /// Time of the last landmark event that set the correction target (s).
    pub t_k: Option<f64>,
    /// Correction target, unwrapped relative to `delta_phi` when it was set.
    pub sync_target: f64,
}

/// Result of one oscillator step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AoStep {
    /// Raw normalized phase `mod(rho, 2pi) / 2pi`.
    pub phi_raw: f64,
    /// Set when the frequency hit the configured floor this step.
    pub omega_clamped: bool,
}

impl OscillatorState {
    pub fn new(cfg: &AoConfig) -> Self {
        Self {
            rho: 0.0,
            omega: cfg.omega_init,
            alpha: vec![0.0; cfg.n_f + 1],
            beta: vec![0.0; cfg.n_f + 1],
            theta_rec: 0.0,
            delta_phi: 0.0,
            t_k: None,
            sync_target: 0.0,
        }
    }

    /// Raw phase as a cycle fraction.
    pub fn phi_raw(&self) -> f64 {
        wrap_unit(self.rho.rem_euclid(TAU) / TAU)
    }

    /// Phase after subtracting the synchronization offset.
    pub fn phi_corrected(&self) -> f64 {
        corrected_phase(self.phi_raw(), self.delta_phi)
    }

    /// Advances the oscillator by one explicit Euler step driven by the
    /// measured angle `theta_m` (deg).
    pub fn step(&mut self, theta_m: f64, cfg: &AoConfig) -> Result<AoStep, OscillatorError> {
        if !theta_m.is_finite() {
            return Err(OscillatorError::SignalFault(theta_m));
        }
        let dt = cfg.dt;
        let e = theta_m - self.theta_rec;
        let (s1, c1) = self.rho.sin_cos();

        let d_rho = self.omega - cfg.psi_phase * e * s1;
        let d_omega = -cfg.psi_freq * e * s1;

        let gain = cfg.epsilon * e * dt;
        let (mut sj, mut cj) = (0.0, 1.0);
        for (a, b) in self.alpha.iter_mut().zip(self.beta.iter_mut()) {
            *a += gain * cj;
            *b += gain * sj;
            (sj, cj) = (sj * c1 + cj * s1, cj * c1 - sj * s1);
        }

        self.rho += d_rho * dt;
        if !(0.0..TAU).contains(&self.rho) {
            self.rho = self.rho.rem_euclid(TAU);
        }
        self.omega += d_omega * dt;
        let omega_clamped = self.omega < cfg.omega_floor;
        if omega_clamped {
            self.omega = cfg.omega_floor;
        }
        self.theta_rec = self.reconstruct(self.rho);

        Ok(AoStep { phi_raw: self.phi_raw(), omega_clamped })
    }

    /// Fourier reconstruction of the hip angle at oscillator phase `rho`.
    pub fn reconstruct(&self, rho: f64) -> f64 {
        let (s1, c1) = rho.sin_cos();
        let (mut sj, mut cj) = (0.0, 1.0);
        let mut acc = 0.0;
        for (a, b) in self.alpha.iter().zip(&self.beta) {
            acc += a * cj + b * sj;
            (sj, cj) = (sj * c1 + cj * s1, cj * c1 - sj * s1);
        }
        acc
    }

    /// Registers a landmark event at `t_k` with synchronization error `e_phi`.
    pub fn set_sync_target(&mut self, e_phi: f64, t_k: f64) {
        self.sync_target = self.delta_phi + wrap_half(e_phi - self.delta_phi);
        self.t_k = Some(t_k);
    }

    /// One Euler step of the offset correction at time `t` using the last
    /// registered target. Returns the correction rate.
    pub fn update_sync_correction(&mut self, t: f64, cfg: &AoConfig) -> f64 {
        let Some(t_k) = self.t_k else {
            return 0.0;
        };
        let rate = sync_rate(self.delta_phi, self.sync_target, self.omega, t, t_k, cfg.k_sync);
        self.delta_phi += rate * cfg.dt;
        if self.delta_phi.abs() > 0.5 {
            let shift = self.delta_phi.round();
            self.delta_phi -= shift;
            self.sync_target -= shift;
        }
        rate
    }
}

/// Offset correction rate `k_sync (e - delta) exp(-omega (t - t_k))`.
pub fn sync_rate(delta_phi: f64, e_phi: f64, omega: f64, t: f64, t_k: f64, k_sync: f64) -> f64 {
    let elapsed = (t - t_k).max(0.0);
    k_sync * (e_phi - delta_phi) * (-omega * elapsed).exp()
}

/// Corrected gait phase `mod(phi_raw - delta_phi, 1)`.
pub fn corrected_phase(phi_raw: f64, delta_phi: f64) -> f64 {
    wrap_unit(phi_raw - delta_phi)
}

/// A landmark gait event: an extremum of the inter-leg angle difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandmarkEvent {
    /// Impaired events come from maxima, healthy events from minima.
    pub side: Side,
    pub time: f64,
    /// Raw healthy-side phase at the event.
    pub phi_hlth_at_event: f64,
    /// Raw impaired-side phase at the event.
    pub phi_imp_at_event: f64,
}

impl LandmarkEvent {
    /// Offset of `leg`'s raw phase from its landmark target, in
    /// `(-0.5, 0.5]`. This is the value the phase correction converges to.
    ///
    /// The healthy phase is anchored to 0 at healthy events and to 0.5 at
    /// impaired events; the impaired phase mirrors this.
    pub fn offset_target(&self, leg: Side) -> f64 {
        let phi = match leg {
            Side::Healthy => self.phi_hlth_at_event,
            Side::Impaired => self.phi_imp_at_event,
        };
        let target = if self.side == leg { 0.0 } else { 0.5 };
        wrap_half(phi - target)
    }
}

/// Healthy-side synchronization error at a landmark event, in `(-0.5, 0.5]`:
/// `phi_hlth - 0.5` at impaired events and `-phi_hlth` at healthy events.
///
/// At healthy events this has the opposite sign of the offset the correction
/// needs, so [`PhaseEstimator`] uses [`LandmarkEvent::offset_target`].
pub fn sync_error(event: &LandmarkEvent) -> f64 {
    match event.side {
        Side::Impaired => wrap_half(event.phi_hlth_at_event - 0.5),
        Side::Healthy => wrap_half(-event.phi_hlth_at_event),
    }
}

/// Checks whether the centre sample of `window` is an extremum of the angle
/// difference. Returns the event side and time.
///
/// A maximum (impaired event) must be strictly greater than every earlier
/// sample and no smaller than every later one; minima mirror that. Windows
/// whose range is below `noise_floor` never produce an event.
pub fn detect_landmark_event(window: &[(f64, f64)], noise_floor: f64) -> Option<(Side, f64)> {
    if window.len() < 3 {
        return None;
    }
    let c = window.len() / 2;
    let (tc, vc) = window[c];
    let (lo, hi) = window.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, v)| (lo.min(v), hi.max(v)));
    if hi - lo < noise_floor {
        return None;
    }
    let (before, after) = (&window[..c], &window[c + 1..]);
    if before.iter().all(|&(_, v)| vc > v) && after.iter().all(|&(_, v)| vc >= v) {
        return Some((Side::Impaired, tc));
    }
    if before.iter().all(|&(_, v)| vc < v) && after.iter().all(|&(_, v)| vc <= v) {
        return Some((Side::Healthy, tc));
    }
    None
}

/// Settings of the streaming landmark detector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LandmarkConfig {
    /// Minimum range of the angle difference inside the window (deg).
    pub noise_floor: f64,
    /// Minimum spacing between events as a fraction of the current period.
    pub refractory_fraction: f64,
    /// Half-width of the extremum window as a fraction of the current period.
    pub window_fraction: f64,
    /// Minimum excursion of an extremum from the running level, as a fraction
    /// of the largest excursion on that side over the last period. Rejects
    /// minor extrema of a multi-humped difference signal.
    pub min_prominence: f64,
}

impl Default for LandmarkConfig {
    fn default() -> Self {
        Self { noise_floor: 0.5, refractory_fraction: 0.3, window_fraction: 0.05, min_prominence: 0.7 }
    }
}

// Periods without an event on one side before its prominence reference is
// treated as stale.
const STALE_PERIODS: f64 = 1.5;

#[derive(Debug, Clone, Copy)]
struct DeltaSample {
    t: f64,
    delta_theta: f64,
    phi_hlth: f64,
    phi_imp: f64,
}

/// Streaming extremum detector on the inter-leg angle difference.
#[derive(Debug, Clone)]
pub struct LandmarkDetector {
    cfg: LandmarkConfig,
    buf: VecDeque<DeltaSample>,
    // Angle difference over the last period.
    recent: VecDeque<(f64, f64)>,
    level: Option<f64>,
    last_event: Option<f64>,
    // Last (impaired, healthy) event times.
    last_by_side: [Option<f64>; 2],
    // Samples pushed so far and the first centre not yet examined.
    pushed: usize,
    next_centre: usize,
}

impl LandmarkDetector {
    pub fn new(cfg: LandmarkConfig) -> Self {
        Self {
            cfg,
            buf: VecDeque::new(),
            recent: VecDeque::new(),
            level: None,
            last_event: None,
            last_by_side: [None, None],
            pushed: 0,
            next_centre: 0,
        }
    }

    /// Pushes one sample of `delta_theta = theta_imp - theta_hlth` with the raw
    /// phases of both legs. `period` is the current cycle period estimate and
    /// `dt` the sample spacing.
    pub fn push(&mut self, t: f64, delta_theta: f64, phi_hlth: f64, phi_imp: f64, period: f64, dt: f64) -> Option<LandmarkEvent> {
        let half = ((self.cfg.window_fraction * period / dt).round() as usize).max(1);
        self.buf.push_back(DeltaSample { t, delta_theta, phi_hlth, phi_imp });
        self.pushed += 1;
        self.recent.push_back((t, delta_theta));
        while self.recent.front().is_some_and(|r| t - r.0 > period) {
            self.recent.pop_front();
        }
        let alpha = (dt / period).clamp(0.0, 1.0);
        let level = match self.level {
            Some(l) => l + alpha * (delta_theta - l),
            None => delta_theta,
        };
        self.level = Some(level);

        // Centres are sample counts since the start. A shrinking window moves
        // the centre forward by more than one sample, so every centre skipped
        // since the last call is examined too.
        let oldest = self.pushed - self.buf.len();
        let mut event = None;
        if let Some(hi) = (self.pushed - 1).checked_sub(half) {
            let lo = self.next_centre.max(oldest + half);
            for c in lo..=hi {
                if event.is_none() {
                    event = self.examine(c - oldest, half, level, period);
                }
            }
            self.next_centre = self.next_centre.max(hi + 1);
        }
        while self.buf.len() > 2 * half + 1 {
            self.buf.pop_front();
        }
        event
    }

    fn examine(&mut self, c: usize, half: usize, level: f64, period: f64) -> Option<LandmarkEvent> {
        let window: Vec<(f64, f64)> = self.buf.range(c - half..=c + half).map(|s| (s.t, s.delta_theta)).collect();
        let (side, tc) = detect_landmark_event(&window, self.cfg.noise_floor)?;
        let centre = self.buf[c];
        let (excursion, largest) = match side {
            Side::Impaired => (centre.delta_theta - level, self.recent.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max) - level),
            Side::Healthy => (level - centre.delta_theta, level - self.recent.iter().map(|r| r.1).fold(f64::INFINITY, f64::min)),
        };
        // After an abrupt change in gait the previous cycle's extremum can
        // dwarf every new one, so an overdue side skips the prominence test.
        let slot = usize::from(side == Side::Healthy);
        let overdue = self.last_by_side[slot].is_some_and(|l| tc - l > STALE_PERIODS * period);
        if excursion <= 0.0 || (!overdue && excursion < self.cfg.min_prominence * largest) {
            return None;
        }
        if let Some(last) = self.last_event {
            if tc - last < self.cfg.refractory_fraction * period {
                return None;
            }
        }
        self.last_event = Some(tc);
        self.last_by_side[slot] = Some(tc);
        Some(LandmarkEvent { side, time: tc, phi_hlth_at_event: centre.phi_hlth, phi_imp_at_event: centre.phi_imp })
    }
}

/// Per-sample output of the two-leg phase estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseEstimate {
    pub phi_imp: f64,
    pub phi_hlth: f64,
    pub event: Option<LandmarkEvent>,
    /// Corrected (healthy, impaired) phases at the instant of `event`.
    pub event_phases: Option<(f64, f64)>,
    pub omega_clamped: bool,
}

/// Two adaptive oscillators plus landmark-based synchronization.
#[derive(Debug, Clone)]
pub struct PhaseEstimator {
    pub cfg: AoConfig,
    pub imp: OscillatorState,
    pub hlth: OscillatorState,
    detector: LandmarkDetector,
    // Recent (t, healthy offset, impaired offset), for phases at past events.
    offsets: VecDeque<(f64, f64, f64)>,
}

impl PhaseEstimator {
    pub fn new(cfg: AoConfig, landmarks: LandmarkConfig) -> Self {
        Self {
            imp: OscillatorState::new(&cfg),
            hlth: OscillatorState::new(&cfg),
            detector: LandmarkDetector::new(landmarks),
            offsets: VecDeque::new(),
            cfg,
        }
    }

    /// Current cycle period estimate from the healthy oscillator (s).
    pub fn period(&self) -> f64 {
        TAU / self.hlth.omega
    }

    pub fn step(&mut self, t: f64, theta_imp: f64, theta_hlth: f64) -> Result<PhaseEstimate, OscillatorError> {
        let si = self.imp.step(theta_imp, &self.cfg)?;
        let sh = self.hlth.step(theta_hlth, &self.cfg)?;
        let event = self.detector.push(t, theta_imp - theta_hlth, sh.phi_raw, si.phi_raw, self.period(), self.cfg.dt);
        let mut event_phases = None;
        if let Some(ev) = event {
            let half_dt = 0.5 * self.cfg.dt;
            let (dh, di) = self
                .offsets
                .iter()
                .find(|o| (o.0 - ev.time).abs() < half_dt)
                .map_or((self.hlth.delta_phi, self.imp.delta_phi), |o| (o.1, o.2));
            event_phases = Some((corrected_phase(ev.phi_hlth_at_event, dh), corrected_phase(ev.phi_imp_at_event, di)));
            self.hlth.set_sync_target(ev.offset_target(Side::Healthy), ev.time);
            self.imp.set_sync_target(ev.offset_target(Side::Impaired), ev.time);
        }
        self.hlth.update_sync_correction(t, &self.cfg);
        self.imp.update_sync_correction(t, &self.cfg);
        self.offsets.push_back((t, self.hlth.delta_phi, self.imp.delta_phi));
        while self.offsets.front().is_some_and(|o| t - o.0 > self.period()) {
            self.offsets.pop_front();
        }
        Ok(PhaseEstimate {
            phi_imp: self.imp.phi_corrected(),
            phi_hlth: self.hlth.phi_corrected(),
            event,
            event_phases,
            omega_clamped: si.omega_clamped || sh.omega_clamped,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn trained_state() -> OscillatorState {
        let cfg = AoConfig::default();
        let mut st = OscillatorState::new(&cfg);
        for k in 0..500 {
            let t = k as f64 * cfg.dt;
            st.step(20.0 * (TAU * 0.91 * t).sin() + 3.0, &cfg).unwrap();
        }
        st
    }

    #[test]
    fn zero_error_only_advances_phase() {
        let cfg = AoConfig::default();
        let mut st = trained_state();
        st.rho = 1.0;
        st.theta_rec = st.reconstruct(st.rho);
        let before = st.clone();
        st.step(before.theta_rec, &cfg).unwrap();
        assert_eq!(st.rho, before.rho + before.omega * cfg.dt);
        assert_eq!(st.omega, before.omega);
        assert_eq!(st.alpha, before.alpha);
        assert_eq!(st.beta, before.beta);
    }

    #[test]
    fn coefficient_arrays_sized_by_n_f() {
        let cfg = AoConfig { n_f: 4, ..Default::default() };
        let st = OscillatorState::new(&cfg);
        assert_eq!(st.alpha.len(), 5);
        assert_eq!(st.beta.len(), 5);
    }

    #[test]
    fn rejects_non_finite_sample() {
        let cfg = AoConfig::default();
        let mut st = OscillatorState::new(&cfg);
        assert!(matches!(st.step(f64::NAN, &cfg), Err(OscillatorError::SignalFault(_))));
        assert!(st.step(f64::INFINITY, &cfg).is_err());
    }

    #[test]
    fn omega_floor_is_flagged() {
        let cfg = AoConfig { omega_init: 1.0, omega_floor: 1.0, ..Default::default() };
        let mut st = OscillatorState::new(&cfg);
        st.rho = 1.0;
        // Positive error with sin(rho) > 0 pushes omega down.
        let out = st.step(50.0, &cfg).unwrap();
        assert!(out.omega_clamped);
        assert_eq!(st.omega, 1.0);
    }

    fn lock_run(f: f64, seconds: f64) -> (f64, f64) {
        let cfg = AoConfig::default();
        let mut st = OscillatorState::new(&cfg);
        let n = (seconds / cfg.dt) as usize;
        let tail = (3.0 / cfg.dt) as usize;
        let mut sq = 0.0;
        for k in 0..n {
            let t = k as f64 * cfg.dt;
            let th = 20.0 * (TAU * f * t).sin();
            let e = th - st.theta_rec;
            if k >= n - tail {
                sq += e * e;
            }
            st.step(th, &cfg).unwrap();
        }
        (st.omega, (sq / tail as f64).sqrt() / 20.0)
    }

    #[test]
    fn sinusoid_frequency_and_reconstruction_lock() {
        let (omega, nrmse) = lock_run(0.91, 30.0);
        let target = TAU * 0.91;
        assert!((omega / target - 1.0).abs() < 0.02, "omega {omega}");
        assert!(nrmse < 0.05, "nrmse {nrmse}");
    }

    #[test]
    fn sync_error_examples() {
        let ev = |side, phi| LandmarkEvent { side, time: 0.0, phi_hlth_at_event: phi, phi_imp_at_event: 0.0 };
        assert_eq!(sync_error(&ev(Side::Healthy, 0.0)), 0.0);
        assert_eq!(sync_error(&ev(Side::Impaired, 0.5)), 0.0);
        assert!((sync_error(&ev(Side::Healthy, 0.97)) - 0.03).abs() < 1e-12);
        assert!((ev(Side::Healthy, 0.97).offset_target(Side::Healthy) + 0.03).abs() < 1e-12);
        assert!((ev(Side::Impaired, 0.52).offset_target(Side::Healthy) - 0.02).abs() < 1e-12);
        assert!((ev(Side::Impaired, 0.52).offset_target(Side::Impaired)).abs() < 1e-12);
    }

    #[test]
    fn sync_correction_fixed_point_and_decay() {
        let cfg = AoConfig::default();
        let mut st = OscillatorState::new(&cfg);
        st.delta_phi = 0.1;
        st.set_sync_target(0.1, 0.0);
        assert_eq!(st.update_sync_correction(0.5, &cfg), 0.0);
        assert_eq!(st.delta_phi, 0.1);

        let far = sync_rate(0.0, 0.4, TAU * 0.9, 10.0, 0.0, cfg.k_sync);
        assert!(far.abs() < 1e-6);
    }

    #[test]
    fn sync_correction_rises_without_overshoot() {
        let cfg = AoConfig::default();
        let mut st = OscillatorState::new(&cfg);
        st.set_sync_target(0.05, 0.0);
        let mut prev = 0.0;
        for k in 1..2000 {
            st.update_sync_correction(k as f64 * cfg.dt, &cfg);
            assert!(st.delta_phi >= prev);
            assert!(st.delta_phi <= 0.05);
            prev = st.delta_phi;
        }
        assert!(prev > 0.0);
    }

    #[test]
    fn corrected_phase_examples() {
        assert!((corrected_phase(0.3, 0.0) - 0.3).abs() < 1e-15);
        assert!((corrected_phase(0.1, 0.3) - 0.8).abs() < 1e-12);
        assert!((corrected_phase(0.95, -0.1) - 0.05).abs() < 1e-12);
    }

    #[test]
    fn monotone_window_has_no_event() {
        let w: Vec<(f64, f64)> = (0..21).map(|k| (k as f64, k as f64)).collect();
        assert!(detect_landmark_event(&w, 0.5).is_none());
        let flat: Vec<(f64, f64)> = (0..21).map(|k| (k as f64, 0.01 * (k as f64 - 10.0).powi(2))).collect();
        assert!(detect_landmark_event(&flat, 0.5).is_some());
        let tiny: Vec<(f64, f64)> = (0..21).map(|k| (k as f64, -0.001 * (k as f64 - 10.0).powi(2))).collect();
        assert!(detect_landmark_event(&tiny, 0.5).is_none());
    }

    fn stream(signal: impl Fn(f64) -> f64, period: f64, seconds: f64) -> Vec<LandmarkEvent> {
        let dt = 1.0 / 250.0;
        let mut det = LandmarkDetector::new(LandmarkConfig::default());
        (0..(seconds / dt) as usize)
            .filter_map(|k| {
                let t = k as f64 * dt;
                det.push(t, signal(t), 0.0, 0.0, period, dt)
            })
            .collect()
    }

    #[test]
    fn sine_extrema_at_quarter_periods() {
        let period = 1.1;
        let events = stream(|t| 20.0 * (TAU * t / period).sin(), period, 2.0 * period);
        let dt = 1.0 / 250.0;
        let max = events.iter().find(|e| e.side == Side::Impaired).unwrap();
        let min = events.iter().find(|e| e.side == Side::Healthy).unwrap();
        assert!((max.time - period / 4.0).abs() <= dt, "{}", max.time);
        assert!((min.time - 3.0 * period / 4.0).abs() <= dt, "{}", min.time);
    }

    #[test]
    fn second_max_inside_refractory_window_is_dropped() {
        let period = 1.0;
        // Two bumps 0.1 T apart on top of a slow baseline.
        let bump = |t: f64, c: f64| 10.0 * (-((t - c) / 0.02).powi(2)).exp();
        let events = stream(|t| bump(t, 0.5) + bump(t, 0.6) - 2.0, period, 1.0);
        let maxima: Vec<_> = events.iter().filter(|e| e.side == Side::Impaired).collect();
        assert_eq!(maxima.len(), 1);
        assert!((maxima[0].time - 0.5).abs() < 0.01);
    }

    #[test]
    fn peak_found_when_window_shrinks_across_it() {
        let dt = 1.0 / 250.0;
        let period = 1.1;
        let peak = period / 4.0;
        // The period estimate drops from 1.2 s to 1.0 s at sample `k`, which
        // narrows the window by two samples.
        for k in 60..100 {
            let mut det = LandmarkDetector::new(LandmarkConfig::default());
            let maxima: Vec<f64> = (0..(0.6 / dt) as usize)
                .filter_map(|i| {
                    let t = i as f64 * dt;
                    det.push(t, 20.0 * (TAU * t / period).sin(), 0.0, 0.0, if i < k { 1.2 } else { 1.0 }, dt)
                })
                .filter(|e| e.side == Side::Impaired)
                .map(|e| e.time)
                .collect();
            assert_eq!(maxima.len(), 1, "switch at {k}");
            assert!((maxima[0] - peak).abs() <= dt, "switch at {k}: {}", maxima[0]);
        }
    }

    #[test]
    fn events_resume_after_amplitude_collapse() {
        // True period 1.0 s, estimate 1.1 s, peaks shrinking 40% per cycle.
        let amp = |t: f64| 30.0 * 0.6f64.powi((t - 0.5).max(0.0).floor() as i32).max(0.2);
        let events = stream(|t| amp(t) * (TAU * t).sin(), 1.1, 6.0);
        let maxima: Vec<f64> = events.iter().filter(|e| e.side == Side::Impaired).map(|e| e.time).collect();
        assert!(maxima.len() >= 3, "{maxima:?}");
        for w in maxima.windows(2) {
            assert!(w[1] - w[0] < 2.1, "{maxima:?}");
        }
    }

    proptest! {
        #[test]
        fn corrected_phase_in_unit_interval(p in 0.0f64..1.0, d in -3.0f64..3.0) {
            let v = corrected_phase(p, d);
            prop_assert!((0.0..1.0).contains(&v));
            prop_assert!((wrap_half(v + d - p)).abs() < 1e-9);
        }

        #[test]
        fn zero_offset_is_identity(p in 0.0f64..1.0) {
            prop_assert_eq!(corrected_phase(p, 0.0), p);
        }
    }
}
