//! Writing a run's logs to disk.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::Session;
use super::protocol::{ConvergenceSummary, SessionLog};
use super::HarnessError;
use crate::optimizer::{Hyperparams, Region};
use crate::symmetry::GaitMetrics;

pub const TRACE_FILE: &str = "trace.csv";
pub const EPISODES_FILE: &str = "episodes.csv";
pub const METRICS_FILE: &str = "metrics.json";
pub const GP_FILE: &str = "gp_final.json";

#[derive(Serialize)]
struct MetricsEntry<'a> {
    session: Session,
    strides: usize,
    hip_moment: f64,
    #[serde(flatten)]
    metrics: &'a GaitMetrics,
}

#[derive(Serialize)]
struct MetricsFile<'a> {
    seed: u64,
    sessions: Vec<MetricsEntry<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    convergence: Option<&'a ConvergenceSummary>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    omega_clamped: bool,
}

#[derive(Serialize)]
struct GpPoint {
    k_theta: f64,
    k_phi: f64,
    objective: f64,
}

#[derive(Serialize)]
struct GpFile {
    region: Region,
    hyperparams: Hyperparams,
    y_offset: f64,
    y_scale: f64,
    dataset: Vec<GpPoint>,
}

fn write(path: PathBuf, contents: &[u8]) -> Result<(), HarnessError> {
    fs::write(&path, contents).map_err(|source| HarnessError::Io { path, source })
}

fn json<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).unwrap_or_default();
    s.push('\n');
    s.into_bytes()
}

pub fn trace_csv(log: &SessionLog) -> String {
    let mut s = String::with_capacity(log.trace.len() * 120);
    s.push_str("t,theta_imp,theta_hlth,phi_imp,phi_hlth,tau_d,tau_actual\n");
    for r in &log.trace {
        let _ = writeln!(s, "{},{},{},{},{},{},{}", r.t, r.theta_imp, r.theta_hlth, r.phi_imp, r.phi_hlth, r.tau_d, r.tau_actual);
    }
    s
}

pub fn episodes_csv(log: &SessionLog) -> String {
    let mut s = String::from("index,k_theta,k_phi,objective,e_theta,e_phi,f_mag\n");
    for e in &log.episodes {
        let r = &e.result;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            e.index, r.gains.k_theta, r.gains.k_phi, r.objective, r.mean_e_theta, r.mean_e_phi, r.mean_f_mag
        );
    }
    s
}

pub fn metrics_json(log: &SessionLog) -> Vec<u8> {
    json(&MetricsFile {
        seed: log.seed,
        sessions: log
            .metrics
            .iter()
            .map(|m| MetricsEntry { session: m.session, strides: m.strides, hip_moment: m.hip_moment, metrics: &m.metrics })
            .collect(),
        convergence: log.convergence.as_ref(),
        omega_clamped: log.omega_clamped,
    })
}

/// Writes the run's files into `out_dir`, creating it if needed. Returns the
/// written paths.
pub fn export(log: &SessionLog, out_dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    fs::create_dir_all(out_dir).map_err(|source| HarnessError::Io { path: out_dir.to_path_buf(), source })?;
    let mut written = Vec::new();
    let mut put = |name: &str, bytes: &[u8]| -> Result<(), HarnessError> {
        let path = out_dir.join(name);
        write(path.clone(), bytes)?;
        written.push(path);
        Ok(())
    };
    put(TRACE_FILE, trace_csv(log).as_bytes())?;
    put(EPISODES_FILE, episodes_csv(log).as_bytes())?;
    put(METRICS_FILE, &metrics_json(log))?;
    if let Some(gp) = &log.gp {
        let file = GpFile {
            region: gp.region,
            hyperparams: gp.hyper,
            y_offset: gp.y_offset,
            y_scale: gp.y_scale,
            dataset: gp.dataset.points.iter().map(|(g, y)| GpPoint { k_theta: g.k_theta, k_phi: g.k_phi, objective: *y }).collect(),
        };
        put(GP_FILE, &json(&file))?;
    }
    Ok(written)
}
