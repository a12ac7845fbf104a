//! Library surface of the experiment driver: configuration, archives,
//! reports, and the subcommand runners. The `latdress` binary is a thin
//! wrapper over this.

pub mod archive;
pub mod config;
pub mod report;
pub mod runner;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid configuration or I/O problem (exit code 2).
    #[error("{0}")]
    Config(String),
    /// Numerical failure: non-convergence or a degenerate input (exit 1).
    #[error("{0}")]
    Numerical(String),
}

impl From<latdress::FieldError> for CliError {
    fn from(e: latdress::FieldError) -> Self {
        CliError::Numerical(e.to_string())
    }
}
