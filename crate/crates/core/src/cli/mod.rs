//! Configuration files, batch commands and CSV output behind the
//! `gyrospec` binary.

pub mod config;
pub mod csv;
pub mod presets;
pub mod run;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;
use thiserror::Error;

pub use config::{parse_config, Command, ConfigError, GainSpec, RunConfig};
pub use run::{run, RunContext};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliError {
    /// Bad invocation or configuration.
    #[error("{0}")]
    Usage(String),
    /// The numerics refused the request.
    #[error("{0}")]
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) => 1,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "gyrospec",
    version,
    about = "Spectra and stability charts of rotating gyroscopic systems"
)]
pub struct Args {
    /// Run configuration (`section.key = value` lines).
    pub config: PathBuf,
    /// Output directory; overrides `run.output`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Sweep worker threads (0 = one per core).
    #[arg(long, env = "GYROSPEC_THREADS")]
    pub threads: Option<usize>,
    /// Tolerance override, e.g. `--tol marginal=1e-9`. Repeatable.
    #[arg(long = "tol", value_name = "KEY=VAL")]
    pub tol: Vec<String>,
}

/// Loads the config named by `args`, applies the overrides, and runs it.
pub fn execute(args: &Args) -> Result<Vec<PathBuf>, CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", args.config.display())))?;
    let mut config = parse_config(&text)?;
    for t in &args.tol {
        config.override_tolerance(t)?;
    }
    let out_dir = args
        .out
        .clone()
        .or_else(|| config.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let ctx = RunContext {
        out_dir,
        threads: args.threads.unwrap_or(0),
    };
    run(&config, &ctx)
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&args) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("gyrospec: {e}");
            e.exit_code()
        }
    }
}
