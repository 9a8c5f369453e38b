//! Command-line driver: configuration, spectrum caching and table output for every stage
//! of the pipeline.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod output;

use thiserror::Error;

pub use commands::{run, Command, Context, Report};
pub use config::RunConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("numerical contract violated: {0}")]
    Numerical(lmg_rat::Error),

    #[error("{0}")]
    Io(String),
}

impl CliError {
    /// Process exit status: 2 for configuration problems, 3 for numerical contract
    /// violations, 1 for anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

/// Exit status of a run that finished but left some rows as failures.
pub const EXIT_PARTIAL: i32 = 4;

impl From<lmg_rat::Error> for CliError {
    fn from(e: lmg_rat::Error) -> Self {
        match e {
            lmg_rat::Error::InvalidParameter(msg) => CliError::Config(msg),
            lmg_rat::Error::Io(_) | lmg_rat::Error::Cache { .. } => CliError::Io(e.to_string()),
            other => CliError::Numerical(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
