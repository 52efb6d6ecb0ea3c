use thiserror::Error;

/// Errors raised by the lab. Condition checkers never error on a violated
/// condition; they report it.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("kernel is singular on the diagonal (x = y)")]
    Singular,

    #[error("structure error: {0}")]
    Structure(String),

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("CFL violated at step {step}: dt = {dt:e} exceeds limit {limit:e}")]
    Cfl { step: usize, dt: f64, limit: f64 },

    #[error("non-finite value detected at step {step}")]
    NonFinite { step: usize },

    #[error("linear solve failed at step {step}: {reason}")]
    LinearSolve { step: usize, reason: String },

    #[error("empty resolution: {0}")]
    EmptyResolution(String),

    #[error("hypothesis containment violated: {0}")]
    Containment(String),

    #[error("mismatched discretizations: {0}")]
    Mismatch(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("config error at `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("certificate violated: {0}")]
    Certificate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;

impl LabError {
    pub(crate) fn param(name: impl Into<String>, reason: impl Into<String>) -> Self {
        LabError::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }
}
