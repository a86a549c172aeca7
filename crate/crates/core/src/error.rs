use thiserror::Error;

pub type Result<T> = std::result::Result<T, DetectError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DetectError {
    /// Malformed input: negative intensity, non-finite value, empty vector.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Inputs are valid but outside the regime where the requested formula holds.
    #[error("out of regime: {0}")]
    OutOfRegime(String),

    /// A theorem's hypothesis does not hold for the given inputs.
    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl DetectError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        DetectError::InvalidInput(msg.into())
    }

    pub(crate) fn regime(msg: impl Into<String>) -> Self {
        DetectError::OutOfRegime(msg.into())
    }

    pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
        if expected == got {
            Ok(())
        } else {
            Err(DetectError::DimensionMismatch { expected, got })
        }
    }
}
