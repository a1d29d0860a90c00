//! Command-line driver for the stochastic Galerkin shallow water solver.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Params;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("solver aborted: {0}")]
    Solver(String),
    #[error("output error: {0}")]
    Io(String),
    #[error("check failed: {0}")]
    CheckFailed(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::CheckFailed(_) => 1,
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Solver(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "sgswe",
    version,
    about = "Stochastic Galerkin shallow water solver"
)]
struct Cli {
    /// TOML config file; flags take precedence
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a scenario and write snapshot fields plus a manifest
    Run(Params),
    /// Errors and observed orders against a reference grid
    Convergence(Params),
    /// Compare with stochastic collocation on the same grid
    CompareCollocation(Params),
    /// Check that a stochastic lake at rest stays at rest
    Wellbalance(Params),
    /// Closure discrepancy of qx qy / h against the number of terms
    Discrepancy(Params),
}

type Action = fn(&config::Resolved) -> Result<(), CliError>;

fn execute(cli: Cli) -> Result<(), CliError> {
    let (flags, action): (&Params, Action) = match &cli.command {
        Command::Run(p) => (p, commands::run),
        Command::Convergence(p) => (p, commands::convergence),
        Command::CompareCollocation(p) => (p, commands::compare_collocation),
        Command::Wellbalance(p) => (p, commands::wellbalance),
        Command::Discrepancy(p) => (p, commands::discrepancy),
    };
    let params = config::merge(cli.config.as_deref(), flags)?;
    let resolved = config::resolve(params)?;
    if let Some(n) = resolved.params.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    action(&resolved)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
