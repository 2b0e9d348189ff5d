//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value violates an operation's precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Input waveform is degenerate (all-zero, empty).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// Waveform is flat: standard deviation below the z-score threshold.
    /// Callers should discard the spike.
    #[error("flat waveform: standard deviation {0:e} is below 1e-12")]
    FlatWaveform(f64),

    /// NaN or infinity produced where a finite value is required.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// A file exists but does not match the expected on-disk schema.
    #[error("format error: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
