use thiserror::Error;

/// Errors raised by system construction, propagation and bound evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid exponent: {0}")]
    InvalidExponent(String),

    #[error("invalid control: {0}")]
    InvalidControl(String),

    #[error("invalid argument `{name}`: {message}")]
    InvalidArgument { name: &'static str, message: String },

    #[error("model error at (channel {channel}, j {j}, k {k}): {message}")]
    Model {
        channel: usize,
        j: usize,
        k: usize,
        message: String,
    },

    #[error("model error: {0}")]
    ModelSpec(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn arg(name: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            message: message.into(),
        }
    }
}
