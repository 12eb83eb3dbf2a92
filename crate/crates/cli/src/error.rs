use thiserror::Error;

use thzbeam_core::CoreError;
use thzbeam_learn::LearnError;
use thzbeam_nn::NnError;

/// CLI errors mapped onto exit codes: 2 config, 3 i/o, 4 dimension
/// mismatch.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error:\n{}", problems.join("\n"))]
    Config { problems: Vec<String> },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn config(problems: Vec<String>) -> Self {
        CliError::Config { problems }
    }

    pub fn io(msg: impl Into<String>) -> Self {
        CliError::Io(msg.into())
    }

    pub fn dim(msg: impl Into<String>) -> Self {
        CliError::DimMismatch(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Io(_) => 3,
            CliError::DimMismatch(_) => 4,
            CliError::Other(_) => 1,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Config(problems) => CliError::Config { problems },
            CoreError::Io(io) => CliError::Io(io.to_string()),
            CoreError::Format(msg) if msg.contains("header") => CliError::DimMismatch(msg),
            other => CliError::Other(other.to_string()),
        }
    }
}

impl From<NnError> for CliError {
    fn from(e: NnError) -> Self {
        match e {
            NnError::Io(io) => CliError::Io(io.to_string()),
            NnError::Shape(msg) => CliError::DimMismatch(msg),
            other => CliError::Other(other.to_string()),
        }
    }
}

impl From<LearnError> for CliError {
    fn from(e: LearnError) -> Self {
        match e {
            LearnError::Core(c) => c.into(),
            LearnError::Nn(n) => n.into(),
            LearnError::Invalid(msg) => CliError::Other(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
