//! The closed loop: plant, phase estimator, stride segmentation and the
//! stride-level controller, stepped at the control rate.

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::HarnessError;
use crate::controller::{actuator_response, assistive_torque, update_magnitude, update_start_phase, AssistState, GainSet};
use crate::oscillator::{LandmarkEvent, PhaseEstimator};
use crate::phase::wrap_unit;
use crate::plant::{Plant, PlantStride};
use crate::symmetry::{estimate_peaks, symmetry_errors, Stride, StrideRecord, StrideSegmenter};
use crate::Side;

/// Phase at which strides are cut, away from both peaks.
pub const STRIDE_SPLIT_PHASE: f64 = 0.25;

/// One control-rate sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: f64,
    pub theta_imp: f64,
    pub theta_hlth: f64,
    pub phi_imp: f64,
    pub phi_hlth: f64,
    pub tau_d: f64,
    pub tau_actual: f64,
}

/// Controller update at one impaired landmark event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleRecord {
    pub time: f64,
    /// Symmetry errors fed to the controller; `None` before both legs have
    /// completed a stride.
    pub e_theta: Option<f64>,
    pub e_phi: Option<f64>,
    /// Magnitude commanded for the coming cycle (Nm).
    pub f_cmd: f64,
    pub f_mag: f64,
    pub phi_start: f64,
    pub gains: GainSet,
}

/// A completed stride with the simulation time it ended at.
#[derive(Debug, Clone, PartialEq)]
pub struct LoggedStride {
    pub time: f64,
    pub stride: Stride,
}

#[derive(Debug, Clone, Default)]
pub struct SimFlags {
    pub omega_clamped: bool,
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub cfg: ExperimentConfig,
    pub plant: Plant,
    pub estimator: PhaseEstimator,
    /// State driving the torque output.
    pub assist: AssistState,
    /// State learned at the latest landmark event, committed to `assist`
    /// when the impaired phase passes the trough of the torque profile.
    pub learned: AssistState,
    last_phi_imp: Option<f64>,
    gains: GainSet,
    tau_actual: f64,
    tick: u64,
    plant_steps: u64,
    meas: (f64, f64),
    seg_imp: StrideSegmenter,
    seg_hlth: StrideSegmenter,
    pub imp_strides: Vec<LoggedStride>,
    pub hlth_strides: Vec<LoggedStride>,
    pub plant_strides: Vec<(f64, PlantStride)>,
    pub cycles: Vec<CycleRecord>,
    /// Landmark events with the corrected (healthy, impaired) phases at the
    /// event instant.
    pub events: Vec<(LandmarkEvent, f64, f64)>,
    pub trace: Vec<TraceRow>,
    pub record_trace: bool,
    pub flags: SimFlags,
    last_impaired_event: f64,
}

impl Simulation {
    pub fn new(cfg: ExperimentConfig, plant_seed: u64) -> Result<Self, HarnessError> {
        cfg.validate()?;
        let plant = Plant::new(cfg.walker.clone(), cfg.human.clone(), plant_seed)?;
        let estimator = PhaseEstimator::new(cfg.oscillator.clone(), cfg.landmarks.clone());
        let min_samples = (0.5 * cfg.walker.cycle_period / cfg.oscillator.dt) as usize;
        Ok(Self {
            assist: AssistState::new(&cfg.curve),
            learned: AssistState::new(&cfg.curve),
            last_phi_imp: None,
            gains: GainSet::ZERO,
            tau_actual: 0.0,
            tick: 0,
            plant_steps: 0,
            meas: (0.0, 0.0),
            seg_imp: StrideSegmenter::new(Side::Impaired, STRIDE_SPLIT_PHASE, min_samples),
            seg_hlth: StrideSegmenter::new(Side::Healthy, STRIDE_SPLIT_PHASE, min_samples),
            imp_strides: Vec::new(),
            hlth_strides: Vec::new(),
            plant_strides: Vec::new(),
            cycles: Vec::new(),
            events: Vec::new(),
            trace: Vec::new(),
            record_trace: true,
            flags: SimFlags::default(),
            last_impaired_event: 0.0,
            plant,
            estimator,
            cfg,
        })
    }

    pub fn time(&self) -> f64 {
        self.tick as f64 * self.cfg.oscillator.dt
    }

    pub fn gains(&self) -> GainSet {
        self.gains
    }

    pub fn set_gains(&mut self, gains: GainSet) {
        self.gains = gains;
    }

    /// Current symmetry errors from the last `n_s` strides of each leg.
    pub fn symmetry_estimate(&self) -> Option<crate::symmetry::SymmetryErrors> {
        let n_s = self.cfg.ilc.n_s;
        let tail = |v: &[LoggedStride]| -> Vec<StrideRecord> {
            v[v.len().saturating_sub(n_s)..].iter().map(|s| s.stride.record.clone()).collect()
        };
        let h = estimate_peaks(&tail(&self.hlth_strides), n_s).ok()?;
        let i = estimate_peaks(&tail(&self.imp_strides), n_s).ok()?;
        Some(symmetry_errors(&h, &i))
    }

    fn ilc_update(&mut self, time: f64) {
        let ilc = &self.cfg.ilc;
        let est = self.symmetry_estimate();
        if let Some(e) = est {
            self.learned = update_magnitude(self.learned, e.e_theta_fle, ilc.lambda_theta, self.gains, ilc.tau_max);
            self.learned = update_start_phase(self.learned, e.e_phi_fle, ilc.lambda_phi, self.gains, &self.cfg.curve);
        }
        self.cycles.push(CycleRecord {
            time,
            e_theta: est.map(|e| e.e_theta_fle),
            e_phi: est.map(|e| e.e_phi_fle),
            f_cmd: self.learned.commanded_magnitude(),
            f_mag: self.learned.f_mag,
            phi_start: self.learned.phi_start,
            gains: self.gains,
        });
    }

    /// Advances one control period. Returns true when an impaired landmark
    /// event (a new gait cycle) occurred.
    pub fn step(&mut self) -> Result<bool, HarnessError> {
        self.tick += 1;
        let t = self.time();
        let rate = self.cfg.walker.sample_rate;
        while ((self.plant_steps + 1) as f64) / rate <= t + 1e-9 {
            let s = self.plant.step(self.tau_actual);
            self.plant_steps += 1;
            self.meas = (s.theta_imp, s.theta_hlth);
            if let Some(ps) = s.stride {
                self.plant_strides.push((s.t, ps));
            }
        }
        let (ti, th) = self.meas;
        let est = self.estimator.step(t, ti, th)?;
        self.flags.omega_clamped |= est.omega_clamped;

        if let Some(stride) = self.seg_imp.push(est.phi_imp, ti) {
            self.imp_strides.push(LoggedStride { time: t, stride });
        }
        if let Some(stride) = self.seg_hlth.push(est.phi_hlth, th) {
            self.hlth_strides.push(LoggedStride { time: t, stride });
        }

        let mut new_cycle = false;
        if let Some(ev) = est.event {
            let (ph, pi) = est.event_phases.unwrap_or((est.phi_hlth, est.phi_imp));
            self.events.push((ev, ph, pi));
            if ev.side == Side::Impaired {
                self.last_impaired_event = t;
                self.ilc_update(t);
                new_cycle = true;
            }
        }

        let trough = wrap_unit(self.assist.phi_start + self.cfg.curve.d_phi_rise + 0.5);
        if let Some(prev) = self.last_phi_imp {
            let (a, b) = (wrap_unit(prev - trough), wrap_unit(est.phi_imp - trough));
            if b < a && a - b > 0.5 {
                self.assist = self.learned;
            }
        }
        self.last_phi_imp = Some(est.phi_imp);

        let tau_d = assistive_torque(est.phi_imp, &self.assist, &self.cfg.curve);
        self.tau_actual = actuator_response(tau_d, self.tau_actual, self.cfg.oscillator.dt, self.cfg.ilc.actuator_lag);
        if self.record_trace {
            self.trace.push(TraceRow {
                t,
                theta_imp: ti,
                theta_hlth: th,
                phi_imp: est.phi_imp,
                phi_hlth: est.phi_hlth,
                tau_d,
                tau_actual: self.tau_actual,
            });
        }
        Ok(new_cycle)
    }

    /// Runs until the next impaired landmark event.
    pub fn run_cycle(&mut self) -> Result<(), HarnessError> {
        let start = self.time();
        loop {
            if self.step()? {
                return Ok(());
            }
            let since = self.time() - self.last_impaired_event.max(start);
            if since > self.cfg.protocol.lock_timeout {
                return Err(HarnessError::LockLost { time: self.time() });
            }
        }
    }

    /// Runs for at least `seconds` of simulated time, ending on a cycle
    /// boundary.
    pub fn run_for(&mut self, seconds: f64) -> Result<(), HarnessError> {
        let end = self.time() + seconds;
        while self.time() < end {
            self.run_cycle()?;
        }
        Ok(())
    }
}
