//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration value (bad profile, bad fractions, ...).
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A caller violated an operation precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A persisted file could not be parsed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Training or evaluation produced non-finite numbers.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// A datagram or model file failed to decode.
    #[error(transparent)]
    Wire(#[from] crate::online::wire::WireError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
