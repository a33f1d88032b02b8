use thiserror::Error;

use crate::formula::ParseError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    /// A size limit that keeps exhaustive or dense computations tractable.
    #[error("{what} = {value} exceeds the configured cap of {cap}")]
    CapExceeded { what: &'static str, value: u64, cap: u64 },

    #[error("range [{lo}, {hi}] is invalid for {num_vars} variables")]
    InvalidRange { lo: u64, hi: u64, num_vars: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: String, actual: String },

    #[error("assignment has {actual} bits but the formula has {expected} variables")]
    AssignmentLength { expected: usize, actual: usize },

    #[error("not a valid density operator: {0}")]
    InvalidDensity(String),

    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),

    #[error("invalid positive map: {0}")]
    InvalidMap(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
