use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PrecodeError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("value outside its domain: {0}")]
    Domain(String),

    #[error("non-finite entry at index {0}")]
    NonFinite(usize),

    #[error("singular channel: condition number estimate {cond:e} exceeds {limit:e}")]
    SingularChannel { cond: f64, limit: f64 },

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("degenerate channel: {0}")]
    DegenerateChannel(String),

    #[error("candidate count {count} exceeds cap {cap}")]
    CandidateCap { count: f64, cap: u64 },

    #[error("unknown bit label {0:#b}")]
    UnknownLabel(usize),

    #[error("unknown algorithm tag `{0}`")]
    UnknownAlgorithm(String),
}

pub type Result<T, E = PrecodeError> = std::result::Result<T, E>;
