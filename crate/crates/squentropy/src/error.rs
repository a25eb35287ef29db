//! Error type shared across the crate.
//!
//! Programmer errors (shape mismatches, out-of-range labels, invalid
//! probabilities) panic at the call site instead; `Error` covers everything a
//! user can trigger from the command line or a config file.

use thiserror::Error;

/// Failures reachable through user input.
///
/// The CLI maps these onto process exit codes: argument and config problems
/// exit 1, data problems exit 2, numeric divergence exits 3.
#[derive(Debug, Error)]
pub enum Error {
    /// A flag or parameter value is out of its documented range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A config file could not be parsed or contains an unknown key.
    #[error("config error: {0}")]
    Config(String),

    /// A CSV file is malformed. `line` is 1-based and counts the header.
    #[error("{path}:{line}: {message}")]
    Csv {
        path: String,
        line: usize,
        message: String,
    },

    /// A dataset is structurally valid but unusable for the requested run.
    #[error("data error: {0}")]
    Data(String),

    /// A checkpoint file is malformed.
    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    /// Training produced a non-finite epoch loss and stopped.
    #[error("training diverged at epoch {epoch}: mean loss is not finite")]
    Divergence { epoch: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
