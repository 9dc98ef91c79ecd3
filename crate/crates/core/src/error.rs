use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A value outside R(G): non-positive or non-finite raw value, or a non-finite log.
    #[error("not a geometric real: {0}")]
    NotGeometric(String),

    /// Arithmetic left the representable range of logs.
    #[error("range error: {0}")]
    Range(String),

    /// Operation undefined for the given argument (e.g. division by 0_G).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("sequence of length {len} is too short (need at least {needed})")]
    TooShort { len: usize, needed: usize },

    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid lambda sequence at index {index}: {reason}")]
    InvalidLambda { index: usize, reason: String },

    #[error("invalid exponent sequence at index {index}: {reason}")]
    InvalidExponent { index: usize, reason: String },

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("unknown sequence family `{0}`")]
    UnknownFamily(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid Orlicz function: {0}")]
    InvalidOrlicz(String),

    /// A theorem hypothesis or operation precondition does not hold on the data.
    #[error("precondition not met: {0}")]
    Precondition(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
