use thiserror::Error;

#[derive(Debug, Error)]
pub enum NnError {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("invalid label {label} for {classes} classes")]
    InvalidLabel { label: usize, classes: usize },

    #[error("non-finite value produced by {0}")]
    NonFinite(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("model format error: {0}")]
    Format(String),
}

impl NnError {
    pub fn shape(msg: impl Into<String>) -> Self {
        NnError::Shape(msg.into())
    }

    pub fn format(msg: impl Into<String>) -> Self {
        NnError::Format(msg.into())
    }
}
