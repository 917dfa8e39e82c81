//! Fixtures shared by the benchmarks in `benches/`.

use aan_core::harness::Simulation;
use aan_core::optimizer::{BayesOpt, BoConfig};
use aan_core::{ExperimentConfig, GainSet};

/// An optimizer holding `n` observations of a smooth bowl, placed on a
/// golden-ratio sequence so no RNG is involved.
pub fn seeded_optimizer(n: usize) -> BayesOpt {
    let cfg = BoConfig::default();
    let region = cfg.region;
    let mut bo = BayesOpt::new(cfg, n);
    for i in 0..n {
        let u = [(0.5 + i as f64 * 0.618_033_988_75).fract(), (0.5 + i as f64 * 0.754_877_666_2).fract()];
        let g = GainSet::new(
            region.k_theta[0] + u[0] * (region.k_theta[1] - region.k_theta[0]),
            region.k_phi[0] + u[1] * (region.k_phi[1] - region.k_phi[0]),
        );
        let y = -8.0 * ((u[0] - 0.6).powi(2) + (u[1] - 0.4).powi(2)) + 0.05 * (7.0 * u[0] + 3.0 * u[1]).sin();
        bo.observe(g, y);
    }
    bo
}

/// A simulation past its initial warm-up, ready for episodes.
pub fn warmed_simulation(seed: u64) -> Simulation {
    let cfg = ExperimentConfig::default();
    let warmup = cfg.protocol.initial_warmup;
    let mut sim = Simulation::new(cfg, seed).expect("default config is valid");
    sim.plant.set_impaired(true);
    sim.run_for(warmup).expect("default walker keeps lock");
    sim
}
