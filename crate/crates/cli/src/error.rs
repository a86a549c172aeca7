use gausdet_core::DetectError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed config text or an unreadable file.
    #[error("{0}")]
    Parse(String),

    /// Well-formed config that violates an invariant.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// Valid inputs for which none of the requested formulas apply.
    #[error("out of regime: {0}")]
    OutOfRegime(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    /// Process exit status: 1 for bad input, 2 for out-of-regime.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::OutOfRegime(_) => 2,
            _ => 1,
        }
    }
}

impl From<DetectError> for CliError {
    fn from(e: DetectError) -> Self {
        match e {
            DetectError::InvalidInput(m) => CliError::Invalid(m),
            DetectError::DimensionMismatch { .. } => CliError::Invalid(e.to_string()),
            DetectError::OutOfRegime(m) | DetectError::NotApplicable(m) => CliError::OutOfRegime(m),
            DetectError::Numerical(m) => CliError::Numerical(m),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
