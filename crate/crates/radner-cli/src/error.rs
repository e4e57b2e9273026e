use thiserror::Error;

/// Top-level error for configuration loading and command execution.
///
/// Exit-code mapping: parse/validation/invalid-parameter problems exit 2,
/// regime or precondition mismatches exit 3, anything else exits 1.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),
    #[error(transparent)]
    Core(#[from] radner_core::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Validation(_) => 2,
            CliError::Core(radner_core::Error::InvalidParams(_)) => 2,
            CliError::Core(radner_core::Error::RegimeMismatch(_))
            | CliError::Core(radner_core::Error::PreconditionViolated(_)) => 3,
            _ => 1,
        }
    }
}
