//! Experiment runner for the timely-aloha toolkit.
//!
//! A run is described by an [`ExperimentConfig`], either loaded from JSON,
//! assembled from command-line flags, or taken from the built-in presets.
//! Results are CSV tables; simulation runs fan out over a rayon pool and are
//! sorted before writing, so output bytes do not depend on `--jobs`.

pub mod config;
pub mod output;
pub mod run;

pub use config::{preset, Command, ExperimentConfig, RunSpec, Scheme, StationsSpec, ValueSpec, PRESET_NAMES};
pub use output::{CsvRow, Table, CSV_HEADER};
pub use run::{execute, write_trace, Outcome, RunOptions};

/// Failure of a CLI command, split by exit status.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CliError {
    /// Bad input; nothing was run or written.
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }

    pub fn runtime(msg: impl Into<String>) -> Self {
        CliError::Runtime(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}
