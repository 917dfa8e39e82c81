//! Assist-as-needed episode objective.

use serde::{Deserialize, Serialize};

use crate::controller::GainSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObjectiveWeights {
    /// Weights of the spatial error (1/deg), temporal error (1/cycle) and
    /// torque magnitude (1/Nm).
    pub gamma: [f64; 3],
    /// Tolerated spatial error (deg).
    pub e_t_theta: f64,
    /// Tolerated temporal error (cycle fraction).
    pub e_t_phi: f64,
}

impl Default for ObjectiveWeights {
    fn default() -> Self {
        Self { gamma: [1.0, 200.0, 0.1], e_t_theta: 2.5, e_t_phi: 0.015 }
    }
}

impl ObjectiveWeights {
    pub fn validate(&self) -> Result<(), String> {
        if self.gamma.iter().any(|g| !(*g >= 0.0 && g.is_finite())) {
            return Err(format!("objective.gamma must be non-negative, got {:?}", self.gamma));
        }
        if !(self.e_t_theta > 0.0 && self.e_t_phi > 0.0) {
            return Err("objective tolerated errors must be > 0".into());
        }
        Ok(())
    }
}

/// Soft dead-zone: close to zero for `|e| < e_t / 2` and close to `|e|`
/// beyond it.
pub fn activation(e: f64, e_t: f64) -> f64 {
    let s = 20.0 / e_t * e;
    let bracket = 1.0 / (1.0 + (-s + 10.0).exp()) + 1.0 / (1.0 + (s + 10.0).exp());
    e.abs() * bracket
}

/// Averaged statistics of the scored part of an episode.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EpisodeStats {
    pub e_theta: f64,
    pub e_phi: f64,
    pub f_mag: f64,
}

pub fn objective(stats: &EpisodeStats, w: &ObjectiveWeights) -> f64 {
    let [g1, g2, g3] = w.gamma;
    -(g1 * activation(stats.e_theta, w.e_t_theta) + g2 * activation(stats.e_phi, w.e_t_phi) + g3 * stats.f_mag)
}

/// Outcome of one episode under a fixed gain set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub gains: GainSet,
    pub objective: f64,
    pub mean_e_theta: f64,
    pub mean_e_phi: f64,
    pub mean_f_mag: f64,
    pub cycles_used: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn activation_examples() {
        assert_eq!(activation(0.0, 2.5), 0.0);
        let half = activation(1.25, 2.5);
        assert!((half / (0.25 * 2.5) - 1.0).abs() < 0.01, "{half}");
        assert!((activation(5.0, 2.5) / 5.0 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn objective_examples() {
        let w = ObjectiveWeights::default();
        assert_eq!(objective(&EpisodeStats::default(), &w), 0.0);
        let imp = EpisodeStats { e_theta: 12.14, ..Default::default() };
        assert!((objective(&imp, &w) + 12.14).abs() < 1e-6);
        let torque = EpisodeStats { f_mag: 10.0, ..Default::default() };
        assert!((objective(&torque, &w) + 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn activation_even_and_squeezed(e in -50.0f64..50.0, e_t in 0.01f64..10.0) {
            let u = activation(e, e_t);
            prop_assert_eq!(u, activation(-e, e_t));
            prop_assert!(u >= 0.0 && u <= e.abs() * (1.0 + 1e-12));
        }

        #[test]
        fn activation_monotone(a in 0.0f64..20.0, d in 0.0f64..5.0) {
            prop_assert!(activation(a + d, 2.5) >= activation(a, 2.5) - 1e-12);
        }

        #[test]
        fn objective_ordering(et in -20.0f64..20.0, ep in -0.2f64..0.2, f in 0.0f64..19.8, df in 0.0f64..5.0) {
            let w = ObjectiveWeights::default();
            let base = EpisodeStats { e_theta: et, e_phi: ep, f_mag: f + df };
            let less = EpisodeStats { f_mag: f, ..base };
            prop_assert!(objective(&less, &w) >= objective(&base, &w));
            prop_assert!(objective(&base, &w) <= 0.0);
        }
    }
}
