//! Command-line driver behind the `xxzq` binary.
//!
//! ```text
//! xxzq <ground|quench|sweep|scaling|oracle-compare> [--config FILE] [key=value ...]
//! ```
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration error, 3 solver
//! failure, 4 analysis failure (partial output is still written).

pub mod commands;
pub mod config;
pub mod csv;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::Error;
use crate::par;

pub use config::{Command, ExperimentConfig, SweepMode};
pub use csv::CsvDoc;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(Error),
    #[error("analysis failure: {0}")]
    Analysis(String),
    #[error("i/o failure: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Io(_) => 1,
            Self::Config(_) => 2,
            Self::Solver(_) => 3,
            Self::Analysis(_) => 4,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(m) | Error::Resource(m) => Self::Config(m),
            other => Self::Solver(other),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "xxzq", version, about = "Quench dynamics of the XXZ chain")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Flat key = value config file
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// key=value overrides, applied after the config file
    overrides: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Self-consistent ground state and mode table
    Ground(CommonArgs),
    /// Discord and concurrence after a single quench
    Quench(CommonArgs),
    /// Measures over a parameter sweep, with maximum ridges
    Sweep(CommonArgs),
    /// Suppression time versus chain length
    Scaling(CommonArgs),
    /// Mean field against exact diagonalization on a small chain
    OracleCompare(CommonArgs),
}

impl Sub {
    fn split(self) -> (Command, CommonArgs) {
        match self {
            Sub::Ground(a) => (Command::Ground, a),
            Sub::Quench(a) => (Command::Quench, a),
            Sub::Sweep(a) => (Command::Sweep, a),
            Sub::Scaling(a) => (Command::Scaling, a),
            Sub::OracleCompare(a) => (Command::OracleCompare, a),
        }
    }
}

/// Resolves the configuration from parsed arguments.
fn load_config(command: Command, args: &CommonArgs) -> Result<ExperimentConfig, CliError> {
    let file = match &args.config {
        Some(p) => config::read_config_file(p)?,
        None => Default::default(),
    };
    let overrides = args
        .overrides
        .iter()
        .map(|o| config::parse_override(o))
        .collect::<Result<Vec<_>, _>>()?;
    ExperimentConfig::resolve(command, file, overrides)
}

/// Runs one experiment on a pool of `cfg.threads` workers and returns the
/// document together with the outcome. On analysis failure the document
/// holds the partial output.
pub fn run_experiment(cfg: &ExperimentConfig) -> (CsvDoc, Result<(), CliError>) {
    let mut doc = CsvDoc::new();
    doc.comment(format!("xxzq {VERSION}"));
    doc.comment(format!("command = {}", cfg.command.name()));
    for line in cfg.header_lines() {
        doc.comment(line);
    }
    let outcome = par::with_threads(cfg.threads, || commands::dispatch(cfg, &mut doc));
    (doc, outcome)
}

fn emit(cfg: &ExperimentConfig, doc: &CsvDoc) -> Result<(), CliError> {
    match &cfg.output {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            doc.write_to(&mut w)?;
        }
        None => doc.write_to(&mut io::stdout().lock())?,
    }
    Ok(())
}

fn execute(command: Command, args: &CommonArgs) -> Result<(), CliError> {
    let cfg = load_config(command, args)?;
    log::info!("running {} with {} thread(s)", command.name(), cfg.threads);
    let (doc, outcome) = run_experiment(&cfg);
    match outcome {
        Ok(()) => emit(&cfg, &doc),
        Err(e @ CliError::Analysis(_)) => {
            emit(&cfg, &doc)?;
            Err(e)
        }
        Err(e) => Err(e),
    }
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (command, args) = cli.command.split();
    match execute(command, &args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("xxzq: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_mapping() {
        assert_eq!(CliError::from(Error::invalid("x")).exit_code(), 2);
        assert_eq!(CliError::from(Error::Resource("x".into())).exit_code(), 2);
        assert_eq!(CliError::from(Error::SingularMode { q: 1.0 }).exit_code(), 3);
        assert_eq!(
            CliError::from(Error::Convergence {
                residual: 1.0,
                iterations: 3
            })
            .exit_code(),
            3
        );
        assert_eq!(CliError::Analysis("x".into()).exit_code(), 4);
    }

    #[test]
    fn usage_errors() {
        assert_eq!(main_with_args(["xxzq"]), 2);
        assert_eq!(main_with_args(["xxzq", "nonsense"]), 2);
        assert_eq!(main_with_args(["xxzq", "ground", "bogus_key=1"]), 2);
        assert_eq!(main_with_args(["xxzq", "ground", "--config", "/nonexistent/file"]), 2);
    }
}
