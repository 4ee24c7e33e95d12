use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("space mismatch: {0}")]
    SpaceMismatch(String),

    #[error("invalid exponent {name} = {value}: {reason}")]
    InvalidExponent {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("no closed form for the operator norm of {0}; use estimate mode")]
    NoClosedForm(String),

    #[error("path has {points} points, brute force is limited to {limit}")]
    TooLarge { points: usize, limit: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid interval [{lo}, {hi})")]
    InvalidInterval { lo: i64, hi: i64 },

    #[error("intervals [{0}, {1}) and [{2}, {3}) overlap")]
    OverlappingIntervals(i64, i64, i64, i64),

    #[error("invalid weight: {0}")]
    InvalidWeight(String),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("empty input: {0}")]
    Empty(&'static str),
}
