//! Command-line front end: config loading, dispatch and exit codes.
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration error.

pub mod commands;
pub mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

pub use commands::{cmd_decay, cmd_epsilon, cmd_shift, cmd_verify};
pub use config::{Mode, Preset, RunConfig};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VERIFY_FAILED: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("cannot write {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Compute(String),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Io { .. } => "io",
            CliError::Compute(_) => "compute",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => EXIT_CONFIG,
            CliError::Compute(_) => EXIT_VERIFY_FAILED,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "tvqed", version, about = "Emitter dynamics in a dielectric with time-modulated damping")]
pub struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Built-in parameter set (used when no --config is given; default: unmodulated).
    #[arg(long, global = true, value_enum)]
    pub preset: Option<Preset>,
    /// Output directory, overriding the config.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Relative tolerance for all integrals, overriding the config.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Rate model for `decay`.
    #[arg(long, global = true, value_enum)]
    pub mode: Option<Mode>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate ε and n over the configured (ω, t) grid.
    Epsilon,
    /// Run the sum-rule, inequality, reality and Kramers-Kronig checks.
    Verify,
    /// Compute β(t), Δ(t) and the excited-state population.
    Decay,
    /// Tabulate the resonant shift Δ_res(t) for the configured detunings.
    Shift,
    /// Print the resolved configuration as JSON.
    Config,
}

/// Config from file or preset with command-line overrides applied, validated.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            RunConfig::from_json(&text)?
        }
        None => cli.preset.unwrap_or(Preset::Unmodulated).config(),
    };
    if let Some(out) = &cli.out {
        cfg.output.dir = out.clone();
    }
    if let Some(tol) = cli.tol {
        cfg.tolerances.frequency = tol;
        cfg.tolerances.oscillatory = tol;
    }
    if let Some(mode) = cli.mode {
        cfg.mode = mode;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn dispatch(cli: &Cli) -> Result<bool, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot configure thread pool: {e}")))?;
    }
    let cfg = resolve_config(cli)?;
    match cli.command {
        Command::Epsilon => cmd_epsilon(&cfg),
        Command::Verify => cmd_verify(&cfg),
        Command::Decay => cmd_decay(&cfg),
        Command::Shift => cmd_shift(&cfg),
        Command::Config => {
            println!("{}", cfg.to_json());
            Ok(true)
        }
    }
}

/// Runs the parsed command and maps the outcome to the exit-code contract.
/// Errors are reported on stderr as a JSON object.
pub fn run(cli: &Cli) -> ExitCode {
    match dispatch(cli) {
        Ok(true) => ExitCode::from(EXIT_OK),
        Ok(false) => ExitCode::from(EXIT_VERIFY_FAILED),
        Err(e) => {
            let report = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{report}");
            ExitCode::from(e.exit_code())
        }
    }
}
