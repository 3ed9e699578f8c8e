use thiserror::Error;

/// Errors raised by the inference pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid prior: {0}")]
    InvalidPrior(String),
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("degenerate scaling for {0}: upper bound equals lower bound")]
    DegenerateScaling(&'static str),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("dataset too small: need at least {needed} samples, got {got}")]
    DatasetTooSmall { needed: usize, got: usize },
    #[error("rejection ABC accepted zero samples after {simulations_used} simulations")]
    ZeroAcceptances { simulations_used: u64 },
    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("malformed checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
