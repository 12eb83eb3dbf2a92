use thiserror::Error;

/// Errors produced by channel generation, codebook search and dataset I/O.
#[derive(Debug, Error)]
pub enum CoreError {
    /// A scalar argument violated its domain (non-positive distance, zero pilot, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Configuration is invalid. Carries every violated constraint, not just the first.
    #[error("invalid configuration:\n{}", .0.join("\n"))]
    Config(Vec<String>),

    /// Matrix/vector dimensions do not agree.
    #[error("shape mismatch: expected {expected}, found {found}")]
    Shape { expected: String, found: String },

    /// A path delay falls outside the cyclic-prefix window of the OFDM grid.
    #[error("path {path} delay out of window: toa*bandwidth = {delay_taps:.3} >= K = {subcarriers}")]
    OutOfWindow {
        path: usize,
        delay_taps: f64,
        subcarriers: usize,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed or mismatching binary file content.
    #[error("format error: {0}")]
    Format(String),
}

impl CoreError {
    pub fn domain(msg: impl Into<String>) -> Self {
        CoreError::Domain(msg.into())
    }

    pub fn format(msg: impl Into<String>) -> Self {
        CoreError::Format(msg.into())
    }
}
