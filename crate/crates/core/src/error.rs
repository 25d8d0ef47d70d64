use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    /// Caller violated a precondition (bad step, wrong dimension, index out of range).
    #[error("usage error: {0}")]
    Usage(String),

    #[error("algebra level mismatch: {left} vs {right}")]
    LevelMismatch { left: u8, right: u8 },

    /// A frame or chart lost rank; `point` is the witness.
    #[error("degenerate frame at {point:?}: {detail}")]
    Degenerate { point: Vec<f64>, detail: String },

    /// A user-supplied structure failed its defining identities.
    #[error("validation failed: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;

pub(crate) fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(LabError::Usage(msg.into()))
}
