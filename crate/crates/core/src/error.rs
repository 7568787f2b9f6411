use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid interval partition: {0}")]
    InvalidPartition(String),

    #[error("size mismatch: expected {expected}, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("{0} must not be empty")]
    Empty(&'static str),

    #[error("window {start}+{len} does not fit in a ground set of size {n}")]
    WindowOutOfRange { start: usize, len: usize, n: usize },

    #[error("order {requested} exceeds the maximal order {max}")]
    OrderOverflow { requested: usize, max: usize },

    #[error("enumeration needs {required} evaluations, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("no model registered for tag {0}")]
    MissingModel(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("map is not a bijection of [{size}]x[{size}]: {reason}")]
    NotBijection { size: usize, reason: String },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("integer overflow while counting")]
    Overflow,

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
