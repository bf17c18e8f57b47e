use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension must be at least 1, got {0}")]
    InvalidDimension(usize),

    #[error("epsilon must lie in [0, 1], got {0}")]
    InvalidEpsilon(f64),

    #[error("malformed step distribution: {0}")]
    MalformedDistribution(String),

    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("empty sample set")]
    EmptySamples,
}

impl Error {
    pub(crate) fn arg(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
