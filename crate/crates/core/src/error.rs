use thiserror::Error;

/// Errors raised across the forecasting toolkit.
///
/// The variants follow the failure classes the command-line front end maps
/// onto distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    /// A size, count or hyper-parameter is outside its admissible range.
    #[error("configuration error: {0}")]
    Config(String),

    /// An operation was called with inputs of the wrong shape or kind.
    #[error("usage error: {0}")]
    Usage(String),

    /// A row of an input file could not be accepted.
    #[error("ingestion error at row {row}: {message}")]
    Ingestion { row: usize, message: String },

    /// Broken internal bookkeeping, such as a missing forward cache.
    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

pub(crate) fn ensure_len(what: &str, got: usize, expected: usize) -> Result<()> {
    if got == expected {
        Ok(())
    } else {
        Err(usage(format!("{what}: expected length {expected}, got {got}")))
    }
}
