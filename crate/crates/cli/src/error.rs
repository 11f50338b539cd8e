use seslab_core::Error as CoreError;
use thiserror::Error;

/// Failure of a subcommand, split by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config files or parameter values: exit code 2.
    #[error("{0}")]
    Usage(String),
    /// I/O problems and failures while running an experiment: exit code 1.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn runtime(msg: impl Into<String>) -> Self {
        CliError::Runtime(msg.into())
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let msg = e.to_string();
        match e {
            CoreError::InvalidArgument { .. }
            | CoreError::InvalidShape { .. }
            | CoreError::Degenerate(_)
            | CoreError::Json(_) => CliError::Usage(msg),
            CoreError::ShapeMismatch { .. }
            | CoreError::ZeroDenominator(_)
            | CoreError::NotCalibrated
            | CoreError::MalformedHeader { .. }
            | CoreError::TruncatedPayload { .. }
            | CoreError::Io { .. } => CliError::Runtime(msg),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
