//! `schac`: simulate the cut-off stochastic Cahn-Hilliard/Allen-Cahn
//! system, verify the Green's function estimates, and estimate path
//! regularity.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "schac", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run Monte-Carlo paths and write snapshots, energies and a manifest.
    Simulate(CommonArgs),
    /// Run the Green's function verification suite.
    GreenVerify(CommonArgs),
    /// Estimate space and time Hölder exponents from simulated paths.
    Holder(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML configuration file; built-in defaults when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub paths: Option<usize>,
    /// Worker threads for path fan-out (default: available cores).
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, env = "SCHAC_OUT_DIR", default_value = "schac-out")]
    pub out_dir: PathBuf,
    /// Downgrade existence-condition violations to warnings.
    #[arg(long)]
    pub override_alpha: bool,
}

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass = 0,
    Fail = 1,
    Inconclusive = 2,
    ConfigError = 3,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Run(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Run(e.into())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let args = match &cli.command {
        Command::Simulate(a) | Command::GreenVerify(a) | Command::Holder(a) => a,
    };
    if let Some(workers) = args.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global() {
            eprintln!("error: cannot size worker pool: {e}");
            return ExitCode::from(Status::Fail as u8);
        }
    }
    let result = match &cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::GreenVerify(a) => commands::green_verify(a),
        Command::Holder(a) => commands::holder(a),
    };
    let status = match result {
        Ok(s) => s,
        Err(CliError::Config(msg)) => {
            eprintln!("config error: {msg}");
            Status::ConfigError
        }
        Err(CliError::Run(e)) => {
            eprintln!("error: {e:#}");
            Status::Fail
        }
    };
    ExitCode::from(status as u8)
}
