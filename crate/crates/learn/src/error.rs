use thiserror::Error;

use thzbeam_core::CoreError;
use thzbeam_nn::NnError;

#[derive(Debug, Error)]
pub enum LearnError {
    #[error(transparent)]
    Core(#[from] CoreError),

    #[error(transparent)]
    Nn(#[from] NnError),

    #[error("{0}")]
    Invalid(String),
}

impl LearnError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        LearnError::Invalid(msg.into())
    }
}
