use thiserror::Error;

/// Errors raised by the inference, objective and simulation layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum RbiError {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid alpha order {0}: must be a non-negative number")]
    InvalidAlpha(f64),

    #[error("support mismatch at state {index}: q is zero where p is positive")]
    SupportMismatch { index: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("{what} index {index} out of range for size {size}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        size: usize,
    },

    #[error("evidence length {evidence} does not match batch length {batch}")]
    LengthMismatch { evidence: usize, batch: usize },

    #[error("non-finite evidence value {0}")]
    NonFiniteEvidence(f64),

    #[error("evidence densities underflow: {0}")]
    DegenerateEvidence(String),

    #[error("invalid query batch: {0}")]
    InvalidBatch(String),

    #[error("invalid configuration: {field}: {reason}")]
    InvalidConfig { field: String, reason: String },

    #[error("invalid boundary parameters: {0}")]
    InvalidBoundary(String),
}

impl RbiError {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        RbiError::InvalidConfig {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, RbiError>;
