use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("domain mismatch: expected {expected}, got {got}")]
    Domain { expected: String, got: String },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("singular window entry |w[{k},{m}]| = {magnitude:.3e} below threshold")]
    SingularWindow { k: usize, m: usize, magnitude: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("statistics error: {0}")]
    Stats(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }
}
