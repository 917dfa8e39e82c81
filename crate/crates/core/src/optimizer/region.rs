//! Feasible gain box and the initialization layout.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::controller::GainSet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Region {
    pub k_theta: [f64; 2],
    pub k_phi: [f64; 2],
}

impl Default for Region {
    fn default() -> Self {
        Self { k_theta: [1.0, 7.0], k_phi: [0.0, 2.0] }
    }
}

impl Region {
    pub fn validate(&self) -> Result<(), String> {
        for (name, [lo, hi]) in [("k_theta", self.k_theta), ("k_phi", self.k_phi)] {
            if !(lo.is_finite() && hi.is_finite() && lo < hi && lo >= 0.0) {
                return Err(format!("region.{name} must satisfy 0 <= lo < hi, got [{lo}, {hi}]"));
            }
        }
        Ok(())
    }

    pub fn contains(&self, g: GainSet) -> bool {
        (self.k_theta[0]..=self.k_theta[1]).contains(&g.k_theta) && (self.k_phi[0]..=self.k_phi[1]).contains(&g.k_phi)
    }

    /// Maps gains to the unit square.
    pub fn normalize(&self, g: GainSet) -> [f64; 2] {
        [(g.k_theta - self.k_theta[0]) / (self.k_theta[1] - self.k_theta[0]), (g.k_phi - self.k_phi[0]) / (self.k_phi[1] - self.k_phi[0])]
    }

    /// Maps a unit-square point back to gains, clamping into the box.
    pub fn denormalize(&self, u: [f64; 2]) -> GainSet {
        let [a, b] = [u[0].clamp(0.0, 1.0), u[1].clamp(0.0, 1.0)];
        GainSet {
            k_theta: self.k_theta[0] + a * (self.k_theta[1] - self.k_theta[0]),
            k_phi: self.k_phi[0] + b * (self.k_phi[1] - self.k_phi[0]),
        }
    }

    pub fn center(&self) -> GainSet {
        self.denormalize([0.5, 0.5])
    }

    pub fn diameter(&self) -> f64 {
        (self.k_theta[1] - self.k_theta[0]).hypot(self.k_phi[1] - self.k_phi[0])
    }

    /// The four corners and the centre, shuffled with `rng`.
    pub fn initial_sets(&self, rng: &mut impl Rng) -> Vec<GainSet> {
        let mut sets: Vec<GainSet> =
            [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [0.5, 0.5]].into_iter().map(|u| self.denormalize(u)).collect();
        sets.shuffle(rng);
        sets
    }
}
