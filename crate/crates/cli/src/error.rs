//! CLI error type with the exit-code contract: 1 for validation problems,
//! 2 for numerical failures, 3 for gradient-check failures.

use corridor_opt_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad input: unreadable or invalid scenario/CSV files, bad flags.
    #[error("{0}")]
    Validation(String),
    /// The numerics failed: non-finite objectives, undefined SINR,
    /// co-located samples, or a failed partition verification.
    #[error("{0}")]
    Numerical(String),
    /// The finite-difference gate found disagreeing gradient components.
    #[error("{0}")]
    GradCheck(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::GradCheck(_) => 3,
        }
    }

    pub fn validation(message: impl Into<String>) -> Self {
        CliError::Validation(message.into())
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        CliError::Numerical(message.into())
    }
}

impl From<CoreError> for CliError {
    fn from(error: CoreError) -> Self {
        match error {
            CoreError::InvalidParameter { .. }
            | CoreError::EmptyRegion { .. }
            | CoreError::EmptySampleSet
            | CoreError::DimensionMismatch { .. } => CliError::Validation(error.to_string()),
            CoreError::CoLocatedSample { .. }
            | CoreError::UndefinedSinr
            | CoreError::RssPowerGradient
            | CoreError::NonFiniteObjective { .. } => CliError::Numerical(error.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(error: std::io::Error) -> Self {
        CliError::Validation(error.to_string())
    }
}
