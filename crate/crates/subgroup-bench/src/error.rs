//! Error type shared across the crate.

use thiserror::Error;

/// Everything that can go wrong in this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Inputs violate a documented precondition (lengths, ranges, headers, ...).
    #[error("invalid input: {0}")]
    Validation(String),

    /// A survival fit was requested on data with no observed events.
    #[error("no observed events; cannot fit a survival model")]
    NoEvents,

    /// A linear system arising in a fit was not positive definite even after
    /// jitter, so no step direction could be computed.
    #[error("singular information matrix: {0}")]
    Singular(String),

    /// A scenario or configuration file could not be parsed.
    #[error("config error: {0}")]
    Config(String),

    /// A requested target is outside the achievable range of a calibration curve.
    #[error("target out of range: {0}")]
    OutOfRange(String),

    /// Filesystem or CSV trouble.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// CSV parse/serialize trouble.
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Shorthand for a [`Error::Validation`] with a formatted message.
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    /// Shorthand for a [`Error::Config`] with a formatted message.
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
