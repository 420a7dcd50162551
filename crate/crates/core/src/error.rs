use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index set is not downward closed: {0}")]
    NotDownwardClosed(String),

    #[error("invalid index set: {0}")]
    InvalidIndexSet(String),

    #[error("invalid weight sequence: {0}")]
    InvalidWeights(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("evaluation failed at index {index}: {message}")]
    Evaluation { index: String, message: String },

    #[error("nonpositive diffusion coefficient {value} at midpoint {node}")]
    NonPositiveCoefficient { node: usize, value: f64 },

    #[error("unsupported family: {0}")]
    UnsupportedFamily(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
