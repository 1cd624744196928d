use thiserror::Error;

/// Errors produced by clustering, partitioning, regression and I/O.
#[derive(Debug, Error)]
pub enum BfcError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("infeasible partition: {0}")]
    InfeasiblePartition(String),
    #[error(
        "matrix is not positive definite (pivot {pivot} = {value:e}); check kernel and lambda"
    )]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("SVR solver hit the iteration cap ({iterations}) with duality gap {gap:e}")]
    SolverMaxIterations { iterations: usize, gap: f64 },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("bad ensemble file: {0}")]
    BadEnsemble(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl BfcError {
    /// Short machine-readable tag used by the CLI error line.
    pub fn kind(&self) -> &'static str {
        match self {
            BfcError::DimensionMismatch { .. } => "dimension_mismatch",
            BfcError::TooFewSamples { .. } => "too_few_samples",
            BfcError::InvalidArgument(_) => "invalid_argument",
            BfcError::InfeasiblePartition(_) => "infeasible_partition",
            BfcError::NotPositiveDefinite { .. } => "not_positive_definite",
            BfcError::SolverMaxIterations { .. } => "solver_max_iterations",
            BfcError::Parse { .. } => "parse",
            BfcError::NonFinite { .. } => "non_finite",
            BfcError::BadEnsemble(_) => "bad_ensemble",
            BfcError::Io(_) => "io",
            BfcError::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, BfcError>;
