use thiserror::Error;

/// Errors produced by the simulator, oracle, and training loop.
#[derive(Debug, Error)]
pub enum Error {
    #[error("infeasible power design: {0}")]
    InfeasibleDesign(String),

    #[error("invalid power level set: {0}")]
    InvalidLevelSet(String),

    #[error("invalid transmission matrix: {0}")]
    InvalidMatrix(String),

    #[error("dimension mismatch: expected {expected}, got {got} ({what})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("index out of range: {0}")]
    OutOfRange(String),

    #[error("empty population")]
    EmptyPopulation,

    #[error("enumeration budget exceeded: {required} outcomes > budget {budget}")]
    BudgetExceeded { required: f64, budget: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value during training at update {update}: {detail}")]
    NonFinite { update: usize, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
