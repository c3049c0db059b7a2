//! Experiment harness behind the `psclab` binary.
//!
//! Every subcommand reads an [`ExperimentConfig`], runs its checks, writes
//! a JSON and a CSV report into the output directory and maps the outcome
//! to an exit code: 0 when every check passes, 1 when one fails, 2 for
//! configuration or I/O errors.

pub mod commands;
pub mod config;
pub mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

pub use config::{ConfigError, ExperimentConfig};
pub use report::{CheckRow, VerificationReport};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("io error at {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

#[derive(Debug, Parser)]
#[command(
    name = "psclab",
    version,
    about = "Killing-field deformations of circle-invariant metrics"
)]
pub struct Cli {
    /// JSON experiment config; omitted sections take their defaults.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory, overriding `output_dir` from the config.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Seed for the random deformation family.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Replaces every check threshold of the selected command.
    #[arg(long, global = true, value_name = "FLOAT")]
    pub tol: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Variation identities, Killing estimate and curvature bounds.
    Verify,
    /// Integrate the deformation path and monitor scalar curvature.
    Flow,
    /// Export surfaces of revolution along the deformation path.
    Figure,
    /// Canonical variations and boundary mean curvature.
    Submersion,
    /// Print the default config as JSON.
    Defaults,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Verify => "verify",
            Command::Flow => "flow",
            Command::Figure => "figure",
            Command::Submersion => "submersion",
            Command::Defaults => "defaults",
        }
    }
}

/// Resolved config after applying the command-line overrides.
pub fn resolve(cli: &Cli) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(t) = cli.tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(ConfigError::Invalid(format!("--tol {t} must be positive")));
        }
    }
    let tables = match cli.command {
        Command::Verify => Some(&mut cfg.verify.tolerances),
        Command::Flow => Some(&mut cfg.flow.tolerances),
        Command::Figure => Some(&mut cfg.figure.tolerances),
        Command::Submersion => Some(&mut cfg.submersion.tolerances),
        Command::Defaults => None,
    };
    if let Some(t) = tables {
        config::override_all(t, cli.tol);
    }
    Ok(cfg)
}

/// Runs the command and returns its report.
pub fn execute(command: Command, cfg: &ExperimentConfig) -> Result<VerificationReport, CliError> {
    let out = &cfg.output_dir;
    let report = match command {
        Command::Verify => commands::verify::run(cfg)?,
        Command::Flow => commands::flow::run(cfg, out)?,
        Command::Figure => commands::figure::run(cfg, out)?,
        Command::Submersion => commands::submersion::run(cfg, out)?,
        Command::Defaults => unreachable!("defaults has no report"),
    };
    report.write(out)?;
    Ok(report)
}

pub fn main_with(cli: Cli) -> ExitCode {
    if cli.command == Command::Defaults {
        println!(
            "{}",
            serde_json::to_string_pretty(&ExperimentConfig::default()).expect("config serializes")
        );
        return ExitCode::SUCCESS;
    }
    let result = resolve(&cli)
        .map_err(CliError::from)
        .and_then(|cfg| execute(cli.command, &cfg));
    match result {
        Ok(report) => {
            report.print_summary();
            if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(err) => {
            eprintln!("psclab {}: {err}", cli.command.name());
            ExitCode::from(2)
        }
    }
}
