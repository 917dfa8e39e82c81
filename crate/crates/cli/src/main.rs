use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use aan_core::harness::{export, run_protocol, run_sweep, ExperimentConfig, SessionLog};
use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

/// Simulated assist-as-needed hip exoskeleton sessions.
#[derive(Parser)]
#[command(name = "aan-gaitsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the session protocol once and export its logs.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Replaces the seed in the config file.
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one protocol per seed in parallel; each seed gets `<out>/seed-<n>`.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Half-open `a..b` or inclusive `a..=b`.
        #[arg(long, value_parser = parse_seeds)]
        seeds: Seeds,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a config file without running anything.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

const NOT_CONVERGED: u8 = 2;

#[derive(Clone, Debug)]
struct Seeds(Vec<u64>);

fn parse_seeds(s: &str) -> Result<Seeds, String> {
    let (a, b, inclusive) = if let Some((a, b)) = s.split_once("..=") {
        (a, b, true)
    } else if let Some((a, b)) = s.split_once("..") {
        (a, b, false)
    } else {
        let one = s.trim().parse::<u64>().map_err(|e| format!("bad seed `{s}`: {e}"))?;
        return Ok(Seeds(vec![one]));
    };
    let a: u64 = a.trim().parse().map_err(|e| format!("bad range start `{a}`: {e}"))?;
    let b: u64 = b.trim().parse().map_err(|e| format!("bad range end `{b}`: {e}"))?;
    let seeds: Vec<u64> = if inclusive { (a..=b).collect() } else { (a..b).collect() };
    if seeds.is_empty() {
        return Err(format!("seed range `{s}` is empty"));
    }
    Ok(Seeds(seeds))
}

fn summary(log: &SessionLog) -> String {
    match &log.convergence {
        Some(c) => format!(
            "seed {}: {} after {} episodes ({} cycles), gains K_theta = {:.3}, K_phi = {:.3}",
            log.seed,
            if c.converged { "converged" } else { "not converged" },
            c.total_episodes,
            c.gait_cycles,
            c.final_gains.k_theta,
            c.final_gains.k_phi
        ),
        None => format!("seed {}: no optimization session", log.seed),
    }
}

fn load(path: &Path) -> Result<ExperimentConfig> {
    ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Validate { config } => {
            load(&config)?;
            println!("{}: ok", config.display());
            Ok(true)
        }
        Command::Run { config, seed, out } => {
            let cfg = ExperimentConfig { seed, ..load(&config)? };
            let log = run_protocol(&cfg)?;
            export(&log, &out)?;
            println!("{}", summary(&log));
            Ok(log.converged())
        }
        Command::Sweep { config, seeds: Seeds(seeds), out } => {
            let cfg = load(&config)?;
            let mut all_converged = true;
            let mut failed = Vec::new();
            for (seed, res) in run_sweep(&cfg, &seeds) {
                match res {
                    Ok(log) => {
                        export(&log, &out.join(format!("seed-{seed}")))?;
                        println!("{}", summary(&log));
                        all_converged &= log.converged();
                    }
                    Err(e) => {
                        eprintln!("seed {seed}: {e}");
                        failed.push(seed);
                    }
                }
            }
            if !failed.is_empty() {
                bail!("{} of {} runs failed: {:?}", failed.len(), seeds.len(), failed);
            }
            Ok(all_converged)
        }
    }
}

fn main() -> ExitCode {
    // Clap exits with 2 on usage errors, which is reserved for non-convergence.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::FAILURE } else { ExitCode::SUCCESS };
        }
    };
    let start = Instant::now();
    let outcome = run(cli);
    eprintln!("wall time {:.2} s", start.elapsed().as_secs_f64());
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(NOT_CONVERGED),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
