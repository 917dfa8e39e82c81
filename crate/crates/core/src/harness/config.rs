//! Run configuration, loaded from TOML.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::controller::{CurveConfig, GainSet, IlcConfig};
use crate::optimizer::{BoConfig, ObjectiveWeights};
use crate::oscillator::{AoConfig, LandmarkConfig};
use crate::plant::{HumanConfig, WalkerConfig};

/// Experimental sessions in protocol order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Session {
    Normal,
    Impaired,
    AssistPredefined,
    AssistOptimize,
    AssistStable,
}

impl Session {
    pub const ALL: [Session; 5] =
        [Session::Normal, Session::Impaired, Session::AssistPredefined, Session::AssistOptimize, Session::AssistStable];

    pub fn name(self) -> &'static str {
        match self {
            Session::Normal => "NORMAL",
            Session::Impaired => "IMPAIRED",
            Session::AssistPredefined => "ASSIST_PREDEFINED",
            Session::AssistOptimize => "ASSIST_OPTIMIZE",
            Session::AssistStable => "ASSIST_STABLE",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolConfig {
    pub sessions: Vec<Session>,
    /// Gait cycles per episode.
    pub episode_cycles: usize,
    /// Trailing cycles of each episode that are scored.
    pub eval_cycles: usize,
    /// Episodes in each fixed-gain session.
    pub session_episodes: usize,
    /// Strides discarded from the metrics at the start of each session.
    pub warmup_strides: usize,
    /// Unassisted walking before the first session, letting the estimator
    /// lock (s).
    pub initial_warmup: f64,
    /// Abort when no impaired landmark event occurs for this long (s).
    pub lock_timeout: f64,
    /// Nominal gains, used when no optimizer result is available.
    pub default_gains: GainSet,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            sessions: Session::ALL.to_vec(),
            episode_cycles: 20,
            eval_cycles: 10,
            session_episodes: 5,
            warmup_strides: 5,
            initial_warmup: 30.0,
            lock_timeout: 3.0,
            default_gains: GainSet::new(6.5, 1.0),
        }
    }
}

/// Everything a run needs.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub protocol: ProtocolConfig,
    pub oscillator: AoConfig,
    pub landmarks: LandmarkConfig,
    pub curve: CurveConfig,
    pub ilc: IlcConfig,
    pub objective: ObjectiveWeights,
    pub bo: BoConfig,
    pub walker: WalkerConfig,
    pub human: HumanConfig,
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, HarnessError> {
        let cfg: ExperimentConfig = toml::from_str(s).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io { path: path.to_path_buf(), source: e })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).unwrap_or_default()
    }

    /// Deterministic plant with adaptation off.
    pub fn deterministic(mut self) -> Self {
        self.walker = self.walker.deterministic();
        self.human.enabled = false;
        self
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let c = |m: String| HarnessError::Config(m);
        let p = &self.protocol;
        if p.episode_cycles == 0 || p.eval_cycles == 0 || p.eval_cycles > p.episode_cycles {
            return Err(c("protocol needs 0 < eval_cycles <= episode_cycles".into()));
        }
        if p.session_episodes == 0 {
            return Err(c("protocol.session_episodes must be >= 1".into()));
        }
        if p.sessions.is_empty() {
            return Err(c("protocol.sessions must not be empty".into()));
        }
        if p.sessions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(c("protocol.sessions must follow protocol order without repeats".into()));
        }
        if p.sessions.iter().any(|s| *s != Session::Normal) && !p.sessions.contains(&Session::Normal) {
            return Err(c("the NORMAL session is required as the HPI reference".into()));
        }
        if p.sessions.contains(&Session::AssistStable) && !p.sessions.contains(&Session::AssistOptimize) {
            return Err(c("ASSIST_STABLE requires ASSIST_OPTIMIZE".into()));
        }
        if !(p.lock_timeout > 0.0 && p.initial_warmup >= 0.0) {
            return Err(c("protocol.lock_timeout must be > 0 and initial_warmup >= 0".into()));
        }
        self.oscillator.validate().map_err(|e| c(e.to_string()))?;
        let lm = &self.landmarks;
        if !(lm.noise_floor >= 0.0 && lm.refractory_fraction > 0.0 && lm.window_fraction > 0.0) {
            return Err(c("landmarks settings must be positive".into()));
        }
        if !(0.0..1.0).contains(&lm.min_prominence) {
            return Err(c("landmarks.min_prominence must lie in [0, 1)".into()));
        }
        self.curve.validate().map_err(c)?;
        self.ilc.validate().map_err(c)?;
        self.objective.validate().map_err(c)?;
        self.bo.validate().map_err(c)?;
        self.walker.validate().map_err(|e| c(e.to_string()))?;
        self.human.validate().map_err(|e| c(e.to_string()))?;
        let control_dt = self.oscillator.dt;
        if control_dt < 1.0 / self.walker.sample_rate - 1e-12 {
            return Err(c("control step must not be shorter than the plant sample period".into()));
        }
        Ok(())
    }
}
