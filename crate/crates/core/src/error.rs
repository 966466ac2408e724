//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad grid construction input (dimension, extents, node counts).
    #[error("invalid domain: {0}")]
    Domain(String),

    /// Model coefficient or exponent outside its admissible range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Configuration file syntax or validation failure.
    #[error("config error: {0}")]
    Config(String),

    /// The conjugate-gradient Helmholtz solve hit its iteration cap.
    #[error("elliptic solve stalled: residual {residual:.3e} after {iterations} iterations")]
    EllipticStall { iterations: usize, residual: f64 },

    /// Inadmissible exponent triple for the interpolation-constant estimator.
    #[error("inadmissible norm exponents: {0}")]
    Inadmissible(String),

    /// Bad sweep specification (unknown or non-numeric key, empty values).
    #[error("sweep error: {0}")]
    Sweep(String),

    /// Not enough recorded rows to judge a trend.
    #[error("time series too short for a verdict: {rows} rows in the tail (need at least 10)")]
    SeriesTooShort { rows: usize },

    /// Unknown manufactured-solution case name.
    #[error("unknown convergence case \"{0}\"; valid cases: heat_cosine, helmholtz_cosine")]
    UnknownCase(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
