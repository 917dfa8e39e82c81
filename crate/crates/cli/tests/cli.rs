use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_aan-gaitsim"))
}

fn default_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/default.toml")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

// A trimmed protocol that still exercises the optimizer.
const SHORT: &str = r#"
seed = 0
[protocol]
session_episodes = 1
initial_warmup = 12.0
[bo]
max_episodes = 6
"#;

#[test]
fn validate_accepts_shipped_config() {
    let o = bin().args(["validate", "--config"]).arg(default_config()).output().unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("ok"));
}

#[test]
fn validate_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "seed = 1\n[walker]\nstride_length = 1.2\n").unwrap();
    let o = bin().args(["validate", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("stride_length"), "{}", stderr(&o));
}

#[test]
fn validate_rejects_out_of_range_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[protocol]\neval_cycles = 50\n").unwrap();
    let o = bin().args(["validate", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn missing_config_is_an_error_naming_the_file() {
    let o = bin().args(["validate", "--config", "/nonexistent/x.toml"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("/nonexistent/x.toml"));
}

#[test]
fn run_writes_outputs_and_reports_nonconvergence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("short.toml");
    std::fs::write(&cfg, SHORT).unwrap();
    let out = dir.path().join("out");
    let o = bin().args(["run", "--seed", "3", "--config"]).arg(&cfg).arg("--out").arg(&out).output().unwrap();
    // Six episodes are too few to meet the stopping rule.
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("wall time"));
    for f in ["trace.csv", "episodes.csv", "metrics.json", "gp_final.json"] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    let metrics = std::fs::read_to_string(out.join("metrics.json")).unwrap();
    assert!(metrics.contains("\"seed\": 3") || metrics.contains("\"seed\":3"), "{metrics}");
}

#[test]
fn run_without_optimizer_exits_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("plain.toml");
    std::fs::write(&cfg, "[protocol]\nsessions = [\"NORMAL\", \"IMPAIRED\"]\nsession_episodes = 1\ninitial_warmup = 10.0\n").unwrap();
    let out = dir.path().join("out");
    let o = bin().args(["run", "--seed", "1", "--config"]).arg(&cfg).arg("--out").arg(&out).output().unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(!out.join("gp_final.json").exists());
}

#[test]
fn sweep_makes_one_directory_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("plain.toml");
    std::fs::write(&cfg, "[protocol]\nsessions = [\"NORMAL\", \"IMPAIRED\"]\nsession_episodes = 1\ninitial_warmup = 10.0\n").unwrap();
    let out = dir.path().join("sweep");
    let o = bin().args(["sweep", "--seeds", "4..=6", "--config"]).arg(&cfg).arg("--out").arg(&out).output().unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    for s in 4..=6 {
        assert!(out.join(format!("seed-{s}/metrics.json")).is_file());
    }
    assert!(!out.join("seed-7").exists());
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 3);
}

#[test]
fn usage_errors_exit_with_one() {
    let o = bin().args(["run", "--config", "x.toml"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    let help = bin().arg("--help").output().unwrap();
    assert!(help.status.success());
}

#[test]
fn sweep_rejects_empty_range() {
    let o = bin().args(["sweep", "--seeds", "5..5", "--out", "/tmp/unused", "--config"]).arg(default_config()).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("empty"));
}
