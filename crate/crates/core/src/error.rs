use thiserror::Error;

/// Errors raised by the integrators, the oracle and the benchmark harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum MerbError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite entry at index {index}")]
    NonFinite { index: usize },

    #[error("linearization point invalid at t = {t}")]
    InvalidLinearizationPoint { t: f64 },

    #[error("finite-difference increment must be positive, got {0}")]
    InvalidIncrement(f64),

    #[error("fast solve diverged at micro-step {micro_step} ({context})")]
    FastSolveDiverged { micro_step: usize, context: String },

    #[error("invalid node configuration: {0}")]
    InvalidNodes(String),

    #[error("missing stage difference for stage {0}")]
    MissingStageDifference(usize),

    #[error("dimension {dim} exceeds the dense oracle limit {limit}")]
    OracleLimit { dim: usize, limit: usize },

    #[error("phi index {0} exceeds the supported maximum of 6")]
    PhiOrder(usize),

    #[error("reference not certified: Richardson difference {difference:e} exceeds {tolerance:e}")]
    ReferenceNotCertified { difference: f64, tolerance: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("report has no rows")]
    EmptyReport,

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for MerbError {
    fn from(e: std::io::Error) -> Self {
        MerbError::Io(e.to_string())
    }
}

impl From<csv::Error> for MerbError {
    fn from(e: csv::Error) -> Self {
        MerbError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for MerbError {
    fn from(e: serde_json::Error) -> Self {
        MerbError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, MerbError>;
