use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid slot selection: {0}")]
    InvalidSlots(String),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("operator is not a density operator: {0}")]
    NotDensity(String),

    #[error("matrix for slot {slot} is not unitary (deviation {deviation:.3e})")]
    NonUnitary { slot: usize, deviation: f64 },

    #[error("superoperator is not invertible (condition estimate {condition:.3e})")]
    Noninvertible { condition: f64 },

    #[error("unsupported shape for this operation: {0}")]
    UnsupportedShape(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Format(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
