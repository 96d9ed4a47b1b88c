use noisy_momentum::Error as CoreError;
use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const INVALID_INPUT: i32 = 1;
    pub const UNSTABLE: i32 = 2;
    pub const BOUND_VIOLATION: i32 = 3;
    pub const ORACLE_MISMATCH: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("unstable: {0}")]
    Unstable(String),
    #[error("bound violated: {}", .0.join(", "))]
    BoundViolation(Vec<String>),
    #[error("oracle mismatch: {0}")]
    OracleMismatch(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Invalid(_) | CliError::Io(_) => exit::INVALID_INPUT,
            CliError::Unstable(_) => exit::UNSTABLE,
            CliError::BoundViolation(_) => exit::BOUND_VIOLATION,
            CliError::OracleMismatch(_) => exit::ORACLE_MISMATCH,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Unstable(_) | CoreError::Timeout { .. } => CliError::Unstable(e.to_string()),
            CoreError::Domain(_) | CoreError::Numerical(_) => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}

pub fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Invalid(msg.into())
}

pub type CliResult<T> = std::result::Result<T, CliError>;
