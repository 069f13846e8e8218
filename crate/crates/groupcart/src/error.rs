//! Error taxonomy shared across the crate.
//!
//! The CLI maps these onto exit codes: configuration, data, usage and I/O
//! problems exit with 2; internal invariant violations exit with 3.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad experiment configuration (missing column, malformed config file, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// The data itself violates a contract (non-binary protected column,
    /// unparseable cell, too few rows, empty group, ...).
    #[error("data error: {0}")]
    Data(String),

    /// An API was called with arguments that violate its preconditions.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// A "cannot happen" condition; indicates a bug, not bad input.
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    /// Process exit code for the CLI: 2 for user-facing problems, 3 for bugs.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Internal(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
