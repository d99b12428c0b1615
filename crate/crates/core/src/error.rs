use num_complex::Complex64;
use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed weight or symbol spec text.
    #[error("parse error at position {position} near `{token}`: {message}")]
    Parse {
        position: usize,
        token: String,
        message: String,
    },

    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A documented precondition of the operation is not met.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// The requested combination is not supported (e.g. non-radial weights).
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A derivative evaluator failed or returned a non-finite value.
    #[error("evaluation failed at z = {re} + {im}i: {message}", re = .point.re, im = .point.im)]
    Evaluation { point: Complex64, message: String },

    /// The symbol failed self-map validation and was not forced.
    #[error("refused: {0}")]
    Refused(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialize(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(
        position: usize,
        token: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        Error::Parse {
            position,
            token: token.into(),
            message: message.into(),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialize(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Serialize(e.to_string())
    }
}
