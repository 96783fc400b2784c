use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("alphabet size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("invalid distribution: {0}")]
    InvalidDist(String),

    #[error("invalid channel: row {row}: {reason}")]
    InvalidChannelRow { row: usize, reason: String },

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid simulation configuration: {0}")]
    InvalidConfig(String),

    #[error("{0}")]
    Io(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("rate {rate} is outside (0, C] with C = {capacity}")]
    RateOutOfRange { rate: f64, capacity: f64 },

    #[error("no grid point satisfies the mutual-information constraint at rate {rate}; refine the grid")]
    Infeasible { rate: f64 },

    #[error("type enumeration would produce {count} types, above the cap of {cap}")]
    TooManyTypes { count: u128, cap: usize },

    #[error("Blahut-Arimoto did not converge in {iterations} iterations; bracket [{lower}, {upper}]")]
    NoConvergence { iterations: usize, lower: f64, upper: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
