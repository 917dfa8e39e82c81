//! Episodes and the scripted session protocol.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Session};
use super::sim::{CycleRecord, Simulation, TraceRow};
use super::HarnessError;
use crate::controller::GainSet;
use crate::optimizer::{objective, BayesOpt, BoFlags, EpisodeResult, EpisodeStats, GpModel};
use crate::symmetry::{compute_metrics, GaitMetrics, SessionData, StrideRecord};

/// Runs one episode of `episode_cycles` gait cycles with `gains` and scores
/// the trailing `eval_cycles`.
pub fn run_episode(sim: &mut Simulation, gains: GainSet) -> Result<EpisodeResult, HarnessError> {
    let p = sim.cfg.protocol.clone();
    sim.set_gains(gains);
    let first = sim.cycles.len();
    for _ in 0..p.episode_cycles {
        sim.run_cycle()?;
    }
    let window = &sim.cycles[first + p.episode_cycles - p.eval_cycles..];
    let stats = episode_stats(window);
    Ok(EpisodeResult {
        gains,
        objective: objective(&stats.0, &sim.cfg.objective),
        mean_e_theta: stats.0.e_theta,
        mean_e_phi: stats.0.e_phi,
        mean_f_mag: stats.0.f_mag,
        cycles_used: stats.1,
    })
}

/// Means over the cycles that carried an error estimate.
pub fn episode_stats(cycles: &[CycleRecord]) -> (EpisodeStats, usize) {
    let used: Vec<&CycleRecord> = cycles.iter().filter(|c| c.e_theta.is_some()).collect();
    let n = used.len();
    if n == 0 {
        return (EpisodeStats::default(), 0);
    }
    let mean = |f: &dyn Fn(&CycleRecord) -> f64| used.iter().map(|c| f(c)).sum::<f64>() / n as f64;
    (EpisodeStats { e_theta: mean(&|c| c.e_theta.unwrap_or(0.0)), e_phi: mean(&|c| c.e_phi.unwrap_or(0.0)), f_mag: mean(&|c| c.f_cmd) }, n)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub index: usize,
    pub session: Session,
    #[serde(flatten)]
    pub result: EpisodeResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionMetrics {
    pub session: Session,
    pub metrics: GaitMetrics,
    pub strides: usize,
    /// Mean peak hip flexion moment (Nm/kg).
    pub hip_moment: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSummary {
    pub converged: bool,
    /// Episodes selected by the optimizer.
    pub optimizer_episodes: usize,
    /// Optimizer episodes plus the initialization episodes.
    pub total_episodes: usize,
    pub gait_cycles: usize,
    pub final_gains: GainSet,
    pub flags: BoFlags,
}

/// Stride with its session and episode tags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrideLog {
    pub session: Session,
    pub episode: usize,
    #[serde(flatten)]
    pub record: StrideRecord,
}

#[derive(Debug, Clone, Default)]
pub struct SessionLog {
    pub seed: u64,
    pub trace: Vec<TraceRow>,
    pub strides: Vec<StrideLog>,
    pub cycles: Vec<CycleRecord>,
    pub episodes: Vec<EpisodeLog>,
    pub metrics: Vec<SessionMetrics>,
    pub convergence: Option<ConvergenceSummary>,
    pub gp: Option<GpModel>,
    pub omega_clamped: bool,
}

impl SessionLog {
    pub fn session_metrics(&self, s: Session) -> Option<&GaitMetrics> {
        self.metrics.iter().find(|m| m.session == s).map(|m| &m.metrics)
    }

    pub fn converged(&self) -> bool {
        self.convergence.as_ref().map_or(true, |c| c.converged)
    }
}

struct Marks {
    imp: usize,
    hlth: usize,
    plant: usize,
}

fn marks(sim: &Simulation) -> Marks {
    Marks { imp: sim.imp_strides.len(), hlth: sim.hlth_strides.len(), plant: sim.plant_strides.len() }
}

/// Gait metrics over strides completed between `from` and now, skipping the
/// first `skip` strides of each leg.
fn metrics_since(sim: &Simulation, from: &Marks, skip: usize, reference: Option<f64>) -> Result<(GaitMetrics, usize, f64), HarnessError> {
    let imp = &sim.imp_strides[(from.imp + skip).min(sim.imp_strides.len())..];
    let hlth = &sim.hlth_strides[(from.hlth + skip).min(sim.hlth_strides.len())..];
    let n = imp.len().min(hlth.len());
    let (imp, hlth) = (&imp[..n], &hlth[..n]);

    let mut imp_rec: Vec<StrideRecord> = imp.iter().map(|s| s.stride.record.clone()).collect();
    let hlth_rec: Vec<StrideRecord> = hlth.iter().map(|s| s.stride.record.clone()).collect();
    // Attach ground-truth hip moments from the plant strides of the window.
    let plant = &sim.plant_strides[(from.plant + skip).min(sim.plant_strides.len())..];
    for (r, (_, ps)) in imp_rec.iter_mut().zip(plant) {
        r.tau_hip_peak = Some(ps.tau_hip_peak);
    }
    let moments: Vec<f64> = plant.iter().map(|(_, ps)| ps.tau_hip_peak).collect();
    let hip_moment = if moments.is_empty() { 0.0 } else { moments.iter().sum::<f64>() / moments.len() as f64 };
    let reference = reference.unwrap_or(hip_moment);
    let hg: Vec<Vec<f64>> = hlth.iter().map(|s| s.stride.grid.clone()).collect();
    let ig: Vec<Vec<f64>> = imp.iter().map(|s| s.stride.grid.clone()).collect();
    let m = compute_metrics(SessionData { hlth: &hlth_rec, imp: &imp_rec, hlth_grids: &hg, imp_grids: &ig, hpi_reference: reference })?;
    Ok((m, n, hip_moment))
}

/// Seeds for the plant and for the order of the initialization sets.
pub fn derive_seeds(seed: u64) -> (u64, ChaCha8Rng) {
    let mut root = ChaCha8Rng::seed_from_u64(seed);
    let plant_seed = root.next_u64();
    let order = ChaCha8Rng::seed_from_u64(root.next_u64());
    (plant_seed, order)
}

/// Runs the configured sessions in order.
pub fn run_protocol(cfg: &ExperimentConfig) -> Result<SessionLog, HarnessError> {
    cfg.validate()?;
    let (plant_seed, mut order_rng) = derive_seeds(cfg.seed);
    let mut sim = Simulation::new(cfg.clone(), plant_seed)?;
    let p = cfg.protocol.clone();
    let mut log = SessionLog { seed: cfg.seed, ..Default::default() };

    let first_impaired = p.sessions.first() != Some(&Session::Normal);
    sim.plant.set_impaired(first_impaired);
    sim.set_gains(GainSet::ZERO);
    sim.run_for(p.initial_warmup)?;

    let mut reference: Option<f64> = None;
    let mut episode_index = 0usize;
    let mut bo: Option<BayesOpt> = None;
    let mut final_gains = p.default_gains;

    for &session in &p.sessions {
        sim.plant.set_impaired(session != Session::Normal);
        let start = marks(&sim);
        let mut episode = |sim: &mut Simulation, gains: GainSet, log: &mut SessionLog| -> Result<EpisodeResult, HarnessError> {
            let imp_before = sim.imp_strides.len();
            let r = run_episode(sim, gains)?;
            for s in &sim.imp_strides[imp_before..] {
                log.strides.push(StrideLog { session, episode: episode_index, record: s.stride.record.clone() });
            }
            log.episodes.push(EpisodeLog { index: episode_index, session, result: r.clone() });
            episode_index += 1;
            Ok(r)
        };

        match session {
            Session::Normal | Session::Impaired => {
                for _ in 0..p.session_episodes {
                    episode(&mut sim, GainSet::ZERO, &mut log)?;
                }
            }
            Session::AssistPredefined => {
                let sets = cfg.bo.region.initial_sets(&mut order_rng);
                let opt = bo.get_or_insert_with(|| BayesOpt::new(cfg.bo.clone(), sets.len()));
                for g in sets {
                    let r = episode(&mut sim, g, &mut log)?;
                    opt.observe(g, r.objective);
                }
            }
            Session::AssistOptimize => {
                let opt = bo.get_or_insert_with(|| BayesOpt::new(cfg.bo.clone(), 0));
                let n_init = opt.model.dataset.len();
                if n_init == 0 {
                    let g = cfg.bo.region.center();
                    let r = episode(&mut sim, g, &mut log)?;
                    opt.observe(g, r.objective);
                }
                let mut converged = false;
                let mut n = 0;
                while n < cfg.bo.max_episodes {
                    let next = opt.suggest()?;
                    let r = episode(&mut sim, next.gains, &mut log)?;
                    opt.observe(next.gains, r.objective);
                    final_gains = next.gains;
                    n += 1;
                    if opt.converged() {
                        converged = true;
                        break;
                    }
                }
                if !converged {
                    final_gains = opt.recommend().unwrap_or(final_gains);
                }
                log.convergence = Some(ConvergenceSummary {
                    converged,
                    optimizer_episodes: n,
                    total_episodes: opt.model.dataset.len(),
                    gait_cycles: opt.model.dataset.len() * p.episode_cycles,
                    final_gains,
                    flags: opt.flags,
                });
                log.gp = Some(opt.model.clone());
            }
            Session::AssistStable => {
                for _ in 0..p.session_episodes {
                    episode(&mut sim, final_gains, &mut log)?;
                }
            }
        }

        let (m, strides, hip) = metrics_since(&sim, &start, p.warmup_strides, reference)?;
        if session == Session::Normal {
            reference = Some(hip);
        }
        log.metrics.push(SessionMetrics { session, metrics: m, strides, hip_moment: hip });
    }

    log.cycles = std::mem::take(&mut sim.cycles);
    log.trace = std::mem::take(&mut sim.trace);
    log.omega_clamped = sim.flags.omega_clamped;
    Ok(log)
}
