use std::f64::consts::TAU;

use aan_core::harness::export::{episodes_csv, metrics_json, trace_csv};
use aan_core::harness::sim::LoggedStride;
use aan_core::harness::{export, run_episode, run_protocol, ExperimentConfig, HarnessError, Session, Simulation};
use aan_core::GainSet;

fn warmed(cfg: ExperimentConfig) -> Simulation {
    let mut sim = Simulation::new(cfg.clone(), 21).unwrap();
    sim.run_for(cfg.protocol.initial_warmup).unwrap();
    sim
}

// Mean peak angle and circular-mean peak phase of the last `n` strides that
// ended no later than `t`.
fn peaks_before(strides: &[LoggedStride], t: f64, n: usize) -> Option<(f64, f64)> {
    let done: Vec<&LoggedStride> = strides.iter().filter(|s| s.time <= t).collect();
    if done.is_empty() {
        return None;
    }
    let tail = &done[done.len().saturating_sub(n)..];
    let k = tail.len() as f64;
    let theta = tail.iter().map(|s| s.stride.record.theta_pf).sum::<f64>() / k;
    let (s, c) = tail.iter().fold((0.0, 0.0), |(s, c), r| {
        let a = TAU * r.stride.record.phi_pf;
        (s + a.sin(), c + a.cos())
    });
    Some((theta, (s.atan2(c) / TAU).rem_euclid(1.0)))
}

fn sigmoid_dead_zone(e: f64, e_t: f64) -> f64 {
    let s = 20.0 * e / e_t;
    e.abs() * (1.0 / (1.0 + (10.0 - s).exp()) + 1.0 / (1.0 + (10.0 + s).exp()))
}

#[test]
fn episode_matches_hand_stepped_recursions() {
    let cfg = ExperimentConfig::default().deterministic();
    let gains = cfg.protocol.default_gains;
    let mut sim = warmed(cfg.clone());
    let first = sim.cycles.len();
    let prev = *sim.cycles.last().unwrap();
    let result = run_episode(&mut sim, gains).unwrap();

    let ilc = &cfg.ilc;
    let init = cfg.curve.phi_start_init;
    let (mut f, mut start) = (prev.f_mag, prev.phi_start);
    let mut scored = Vec::new();
    for (i, c) in sim.cycles[first..].iter().enumerate() {
        let (th_h, ph_h) = peaks_before(&sim.hlth_strides, c.time, ilc.n_s).unwrap();
        let (th_i, ph_i) = peaks_before(&sim.imp_strides, c.time, ilc.n_s).unwrap();
        let e_theta = th_h - th_i;
        let mut e_phi = ph_h - ph_i;
        if e_phi > 0.5 {
            e_phi -= 1.0;
        } else if e_phi <= -0.5 {
            e_phi += 1.0;
        }
        assert!((c.e_theta.unwrap() - e_theta).abs() < 1e-9, "cycle {i}");
        assert!((c.e_phi.unwrap() - e_phi).abs() < 1e-9, "cycle {i}");

        let drive = if e_theta >= 0.0 { gains.k_theta * e_theta } else { 0.0 };
        f = (ilc.lambda_theta * f + (1.0 - ilc.lambda_theta) * drive).clamp(0.0, ilc.tau_max);
        start = (ilc.lambda_phi * start + (1.0 - ilc.lambda_phi) * (init - gains.k_phi * e_phi)).clamp(init - 0.05, init + 0.05);
        let cmd = if e_theta >= 0.0 { f } else { 0.0 };
        assert!((c.f_mag - f).abs() < 1e-9 && (c.f_cmd - cmd).abs() < 1e-9 && (c.phi_start - start).abs() < 1e-12);
        if i >= cfg.protocol.episode_cycles - cfg.protocol.eval_cycles {
            scored.push((e_theta, e_phi, cmd));
        }
    }
    assert_eq!(scored.len(), cfg.protocol.eval_cycles);
    let n = scored.len() as f64;
    let (et, ep, fm) = scored.iter().fold((0.0, 0.0, 0.0), |a, s| (a.0 + s.0, a.1 + s.1, a.2 + s.2));
    let w = &cfg.objective;
    let j =
        -(w.gamma[0] * sigmoid_dead_zone(et / n, w.e_t_theta) + w.gamma[1] * sigmoid_dead_zone(ep / n, w.e_t_phi) + w.gamma[2] * fm / n);
    assert!((result.objective - j).abs() < 1e-9, "{} vs {j}", result.objective);
}

#[test]
fn zero_gains_give_error_only_objective() {
    let cfg = ExperimentConfig::default();
    let mut sim = warmed(cfg.clone());
    let r = run_episode(&mut sim, GainSet::ZERO).unwrap();
    assert!(sim.cycles.iter().all(|c| c.f_mag == 0.0));
    assert_eq!(r.mean_f_mag, 0.0);
    let w = &cfg.objective;
    let j = -(w.gamma[0] * sigmoid_dead_zone(r.mean_e_theta, w.e_t_theta) + w.gamma[1] * sigmoid_dead_zone(r.mean_e_phi, w.e_t_phi));
    assert!((r.objective - j).abs() < 1e-12);
}

#[test]
fn same_seed_same_episode_bytes() {
    let run = || {
        let mut sim = warmed(ExperimentConfig::default());
        serde_json::to_vec(&run_episode(&mut sim, GainSet::new(4.0, 1.0)).unwrap()).unwrap()
    };
    assert_eq!(run(), run());
}

#[test]
fn trace_rows_follow_the_control_rate() {
    let cfg = ExperimentConfig::default();
    let mut sim = Simulation::new(cfg, 4).unwrap();
    sim.run_for(12.0).unwrap();
    let duration = sim.time();
    let expected = duration * 250.0;
    assert!((sim.trace.len() as f64 - expected).abs() <= 1.0, "{} rows for {duration} s", sim.trace.len());
}

fn short_protocol(seed: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig { seed, ..Default::default() };
    cfg.protocol.session_episodes = 2;
    cfg.protocol.initial_warmup = 15.0;
    cfg.bo.max_episodes = 6;
    cfg
}

#[test]
fn without_impairment_assistance_stays_minimal() {
    for seed in [1, 2] {
        let mut cfg = short_protocol(seed);
        cfg.walker.flexion_deficit = 0.0;
        cfg.walker.temporal_shift = 0.0;
        let log = run_protocol(&cfg).unwrap();
        let stable: Vec<f64> = log.episodes.iter().filter(|e| e.session == Session::AssistStable).map(|e| e.result.mean_f_mag).collect();
        assert!(!stable.is_empty());
        let f = stable.iter().sum::<f64>() / stable.len() as f64;
        assert!(f < 1.0, "seed {seed}: stable F_mag {f}");
    }
}

#[test]
fn exports_are_stable_and_omit_empty_sections() {
    let mut cfg = short_protocol(9);
    cfg.protocol.sessions = vec![Session::Normal, Session::Impaired];
    let log = run_protocol(&cfg).unwrap();
    let json = String::from_utf8(metrics_json(&log)).unwrap();
    assert!(!json.contains("convergence") && !json.contains("null"), "{json}");

    let dir = tempfile::tempdir().unwrap();
    let written = export(&log, dir.path()).unwrap();
    assert!(!dir.path().join("gp_final.json").exists());
    assert_eq!(written.len(), 3);
    let again = tempfile::tempdir().unwrap();
    export(&log, again.path()).unwrap();
    for f in ["trace.csv", "episodes.csv", "metrics.json"] {
        assert_eq!(std::fs::read(dir.path().join(f)).unwrap(), std::fs::read(again.path().join(f)).unwrap(), "{f}");
    }
    assert_eq!(episodes_csv(&log).lines().count(), log.episodes.len() + 1);
    assert_eq!(trace_csv(&log).lines().count(), log.trace.len() + 1);
}

#[test]
fn identical_seeds_identical_files() {
    let a = run_protocol(&short_protocol(5)).unwrap();
    let b = run_protocol(&short_protocol(5)).unwrap();
    assert_eq!(trace_csv(&a), trace_csv(&b));
    assert_eq!(episodes_csv(&a), episodes_csv(&b));
    assert_eq!(metrics_json(&a), metrics_json(&b));
    let c = run_protocol(&short_protocol(6)).unwrap();
    assert_ne!(episodes_csv(&a), episodes_csv(&c));
}

#[test]
fn unwritable_export_path_names_the_path() {
    let log = run_protocol(&ExperimentConfig {
        protocol: aan_core::ProtocolConfig {
            sessions: vec![Session::Normal],
            session_episodes: 1,
            initial_warmup: 10.0,
            ..Default::default()
        },
        ..Default::default()
    })
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, b"x").unwrap();
    let target = blocker.join("out");
    let err = export(&log, &target).unwrap_err();
    assert!(matches!(err, HarnessError::Io { .. }));
    assert!(err.to_string().contains("file"), "{err}");
}
