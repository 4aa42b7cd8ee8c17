//! `consensus-dyn`: run, sweep and audit consensus simulations.
//!
//! Exit codes: 0 on success, 2 on invalid input or I/O failure (including
//! malformed command lines), 3 when an audit finds a violation.

mod audits;
mod config;
mod counterexample;
mod plotdata;
mod run;
mod sweep;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use crate::config::ScenarioConfig;

#[derive(Parser, Debug)]
#[command(name = "consensus-dyn", version, about = "Consensus on dynamic networks: simulation and audits")]
struct Cli {
    /// Scenario file (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory; `run`, `sweep` and `verify` default to the current one.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, global = true, env = "CONSENSUS_DYN_THREADS", value_name = "N")]
    threads: Option<usize>,
    /// Overrides the scenario seed (for `counterexample`, the sampling seed).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate one scenario and write its trace and summary.
    Run,
    /// Simulate the cartesian product of the sweep axes.
    Sweep,
    /// Show the component-wise midpoint leaving the hull in R^3, and not in R^1, R^2.
    Counterexample,
    /// Turn a stored trace into long-format plot data.
    Plotdata {
        /// Positions CSV written by `run`.
        trace: PathBuf,
        /// Margins CSV; defaults to `margins.csv` beside the trace.
        #[arg(long)]
        margins: Option<PathBuf>,
    },
    /// Re-run the configured audits on a stored trace.
    Verify {
        /// Positions CSV; defaults to the config's trace name in `--out`.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    AuditFailed,
}

fn load_config(cli: &Cli) -> Result<ScenarioConfig> {
    let path = cli.config.as_deref().context("--config is required for this command")?;
    let mut config = ScenarioConfig::load(path)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn execute(cli: Cli) -> Result<Status> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    match &cli.command {
        Command::Run => run::cmd_run(&load_config(&cli)?, &out),
        Command::Sweep => sweep::cmd_sweep(&load_config(&cli)?, &out),
        Command::Verify { trace } => run::cmd_verify(&load_config(&cli)?, &out, trace.clone()),
        Command::Counterexample => {
            counterexample::cmd_counterexample(cli.seed.unwrap_or(0))?;
            Ok(Status::Ok)
        }
        Command::Plotdata { trace, margins } => {
            plotdata::cmd_plotdata(trace, margins.as_deref(), cli.out.as_deref().map(Path::new))?;
            Ok(Status::Ok)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::AuditFailed) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
