//! Error type shared by the library and the CLI.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated a documented precondition (length mismatch,
    /// out-of-range parameter, sample-rate mismatch, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A configuration value or key was rejected.
    #[error("configuration error: {0}")]
    Config(String),

    /// The input signal is too short for the requested operation.
    #[error("input too short: need at least {needed} samples, got {got}")]
    TooShortInput { needed: usize, got: usize },

    /// The input is numerically degenerate (zero power where power is
    /// required, no usable metric frames, ...).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// A WAV file is well-formed but uses an unsupported encoding.
    #[error("unsupported wav format: {field} is {value}, expected {expected}")]
    UnsupportedFormat {
        field: &'static str,
        value: u32,
        expected: &'static str,
    },

    /// A WAV file could not be parsed; `offset` is the byte position the
    /// parser gave up at.
    #[error("malformed wav at byte {offset}: {reason}")]
    MalformedWav { offset: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn degenerate(msg: impl Into<String>) -> Self {
        Error::DegenerateInput(msg.into())
    }
}
