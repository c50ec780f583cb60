//! Experiment runner for the qtraffic forecasting toolkit: configuration,
//! subcommands, reports, and plots.

pub mod commands;
pub mod config;
pub mod plot;
pub mod report;
pub mod store;

use thiserror::Error;

/// Failure classes, each with its own process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("ingestion error: {0}")]
    Ingestion(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Config(_) => 3,
            CliError::Ingestion(_) => 4,
            CliError::Internal(_) => 5,
            CliError::Io(_) => 6,
        }
    }
}

impl From<qtraffic::Error> for CliError {
    fn from(e: qtraffic::Error) -> Self {
        use qtraffic::Error as E;
        match e {
            E::Config(m) => CliError::Config(m),
            E::Usage(m) => CliError::Usage(m),
            e @ E::Ingestion { .. } => CliError::Ingestion(e.to_string()),
            E::Internal(m) => CliError::Internal(m),
            E::Io(e) => CliError::Io(e),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Internal(format!("json: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;
