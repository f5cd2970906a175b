//! `arrival`: batch front-end producing CSV tables and verification reports.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use arrival_core::Error;

/// Environment variable overriding the worker thread count.
pub const THREADS_VAR: &str = "ARRIVAL_THREADS";

#[derive(Parser, Debug)]
#[command(name = "arrival", version, about = "Arrival-time statistics and Fisher information of many-particle sources")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// ω(t) and Ω(t) traces for detector widths, finite ⟨N⟩ and the beam.
    Intensity(commands::IntensityArgs),
    /// First-detection density p₁(t), or the joint density p₂ on a grid.
    Density(commands::DensityArgs),
    /// Fisher information I_n and its parts.
    Fisher(commands::FisherArgs),
    /// I_n over an (n, r₀) grid for a beam.
    SweepDensity(commands::SweepArgs),
    /// Seeded synthetic arrival records.
    Sample(commands::SampleArgs),
    /// Acceptance criteria and invariants.
    Verify(commands::VerifyArgs),
}

/// Options shared by every table-producing subcommand.
#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Scenario file in `key = value` format.
    #[arg(short, long)]
    pub config: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    /// Write the run manifest to this file.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

/// Failure classes mapped onto process exit codes.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Tolerance(String),
    Verification(usize),
    Other(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Tolerance(_) => 3,
            CliError::Verification(_) => 4,
            CliError::Other(_) => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Domain(_) | Error::Mode(_) | Error::Unsupported(_) | Error::Range { .. } => {
                CliError::Config(e.to_string())
            }
            Error::Tolerance { .. } => CliError::Tolerance(e.to_string()),
            other => CliError::Other(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(e.to_string())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(s) | CliError::Tolerance(s) | CliError::Other(s) => f.write_str(s),
            CliError::Verification(n) => write!(f, "{n} check(s) failed"),
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_VAR} must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Other(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Intensity(a) => commands::intensity(a),
        Command::Density(a) => commands::density(a),
        Command::Fisher(a) => commands::fisher(a),
        Command::SweepDensity(a) => commands::sweep_density(a),
        Command::Sample(a) => commands::sample(a),
        Command::Verify(a) => commands::verify(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("arrival: {e}");
            ExitCode::from(e.code())
        }
    }
}
