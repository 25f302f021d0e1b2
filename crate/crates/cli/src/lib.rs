//! Batch front end for the polariton models: one task per invocation,
//! configured by a TOML file, producing CSV, gnuplot data and text reports
//! plus a SHA-256 manifest of everything written.

pub mod artifacts;
pub mod config;
mod plot;
mod tasks;

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use artifacts::{Artifact, Manifest, MANIFEST_NAME};
pub use config::{RunConfig, Task};

/// Environment variable holding the default worker thread count.
pub const THREADS_ENV: &str = "POLARITON_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    /// Classify a core error raised while a task is running.
    pub(crate) fn from_run(e: polariton_core::Error) -> Self {
        match e {
            polariton_core::Error::Io(io) => CliError::Io(io.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }

    /// Classify a core error raised while a config is being checked.
    pub(crate) fn from_setup(e: polariton_core::Error) -> Self {
        match e {
            polariton_core::Error::Io(io) => CliError::Io(io.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub task: Task,
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub force_overwrite: bool,
}

/// Parse and validate the config, check the destination, run the task and
/// commit its outputs. Nothing is written unless every step before the
/// commit succeeds.
pub fn run(options: &RunOptions) -> CliResult<Manifest> {
    let text = fs::read_to_string(&options.config)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", options.config.display())))?;
    let config = RunConfig::parse(&text)?;
    if let Some(task) = config.task {
        if task != options.task {
            return Err(CliError::Config(format!(
                "config is for task `{}` but `{}` was requested",
                task.name(),
                options.task.name()
            )));
        }
    }
    let base = options.config.parent().unwrap_or(Path::new("."));
    // `out` in the config is relative to the config file
    let out = options
        .out
        .clone()
        .or_else(|| config.out.as_ref().map(|o| base.join(o)))
        .ok_or_else(|| CliError::Config("no output directory: pass --out or set `out` in the config".into()))?;
    let seed = options.seed.or(config.seed).unwrap_or(0);

    let plan = tasks::prepare(options.task, &config, base)?;
    artifacts::check_destination(&out, &plan.outputs(), options.force_overwrite)?;
    let produced = plan.execute(seed)?;
    debug_assert_eq!(
        produced.iter().map(|a| a.name.as_str()).collect::<std::collections::BTreeSet<_>>(),
        plan.outputs().iter().map(String::as_str).collect(),
    );
    artifacts::commit(&out, produced, options.force_overwrite)
}
