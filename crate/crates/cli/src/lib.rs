//! Command-line experiments for the noon-passage simulator.
//!
//! Curves go out as CSV, sweeps add a JSON sidecar with the fixed parameters,
//! and the protocol command prints a JSON transcript. Exit codes: 0 success,
//! 2 configuration, 3 I/O, 4 numerical failure.

pub mod commands;
pub mod config;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use noon_passage::Error;

pub use commands::Output;
pub use config::{CommonArgs, Grid, RunConfig};

/// Environment variable capping the number of sweep worker threads.
pub const THREADS_ENV: &str = "NOON_PASSAGE_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Numeric(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Numeric(_) => 4,
        }
    }
}

fn is_config_error(e: &Error) -> bool {
    match e {
        Error::InvalidParameters(_) | Error::CapacityExceeded { .. } => true,
        Error::Step { source, .. } => is_config_error(source),
        _ => false,
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if is_config_error(&e) {
            CliError::Config(e.to_string())
        } else {
            CliError::Numeric(e)
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "noon-passage", version, about = "NOON-state adiabatic passage experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Normalized pulse shapes: t, omega_L_norm, omega_R_norm, omega_1_norm.
    Pulses(CommonArgs),
    /// Population dynamics from (psi1+psi6)/sqrt2: t, p1..p10, norm2, dark_overlap.
    Simulate(CommonArgs),
    /// Instantaneous eigenvalues: t, e1..e10.
    Spectrum(CommonArgs),
    /// Single-round fidelity against gamma_f, eta or n: x, fidelity, overlay_value.
    FidelitySweep(CommonArgs),
    /// NOON fidelity against the number of rounds: x, fidelity, overlay_value.
    NoonScaling(CommonArgs),
    /// Full multi-round protocol as a JSON transcript.
    Protocol(CommonArgs),
}

impl Command {
    pub fn args(&self) -> &CommonArgs {
        match self {
            Command::Pulses(a)
            | Command::Simulate(a)
            | Command::Spectrum(a)
            | Command::FidelitySweep(a)
            | Command::NoonScaling(a)
            | Command::Protocol(a) => a,
        }
    }
}

pub fn execute(command: &Command) -> Result<Output, CliError> {
    let cfg = command.args().resolve()?;
    match command {
        Command::Pulses(_) => commands::cmd_pulses(&cfg),
        Command::Simulate(_) => commands::cmd_simulate(&cfg),
        Command::Spectrum(_) => commands::cmd_spectrum(&cfg),
        Command::FidelitySweep(_) => commands::cmd_fidelity_sweep(&cfg),
        Command::NoonScaling(_) => commands::cmd_noon_scaling(&cfg),
        Command::Protocol(_) => commands::cmd_protocol(&cfg),
    }
}

/// `<out>.json`, next to the CSV.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })
}

/// Writes `output` to `--out` (plus sidecar), or the body alone to stdout.
pub fn emit(output: &Output, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => {
            write_file(path, &output.body)?;
            if let Some(side) = &output.sidecar {
                write_file(&sidecar_path(path), side)?;
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(output.body.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Io { path: PathBuf::from("<stdout>"), source: e })?;
        }
    }
    if let Some(s) = &output.summary {
        eprintln!("{s}");
    }
    Ok(())
}

/// Sizes the global rayon pool from [`THREADS_ENV`] when it is set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer (got {raw:?})")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    configure_threads()?;
    let output = execute(&cli.command)?;
    emit(&output, cli.command.args().out.as_deref())
}
