use thiserror::Error;

/// Errors raised by the link-model library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("qudit dimension {0} must be at least 2")]
    Dimension(usize),

    #[error("index {index} out of range for dimension {d}")]
    IndexOutOfRange { index: usize, d: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("expected {expected} pulses, got {got}")]
    PulseCount { expected: usize, got: usize },

    #[error("pulse table: {0}")]
    PulseTable(String),

    #[error("optimizer did not converge: {0}")]
    NoConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(name: &'static str, reason: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter {
        name,
        reason: reason.into(),
    })
}
