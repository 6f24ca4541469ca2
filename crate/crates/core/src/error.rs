use thiserror::Error;

/// Errors raised by the ordinal-pattern routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("tied values in window at offsets {first} and {second}")]
    Tie { first: usize, second: usize },

    #[error("series of length {len} is too short: need at least {needed}")]
    SeriesTooShort { len: usize, needed: usize },

    #[error("every window of the series contains tied values")]
    AllWindowsTied,

    #[error("non-finite value {value} at position {position}")]
    NonFinite { position: usize, value: f64 },

    #[error("invalid pattern: {0}")]
    InvalidPattern(String),

    #[error("pattern length {m} outside supported range {min}..={max}")]
    UnsupportedLength { m: usize, min: usize, max: usize },

    #[error("delay must be at least 1")]
    ZeroDelay,

    #[error("operation requires pattern length {expected}, got {actual}")]
    WrongLength { expected: usize, actual: usize },

    #[error("distribution violates constraint: {0}")]
    ConstraintViolation(String),

    #[error("relative contributions are undefined at the white-noise distribution")]
    DegenerateAtWhiteNoise,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("exact computation over {objects} objects exceeds the limit of {limit}")]
    SizeLimit { objects: usize, limit: usize },

    #[error("zero denominator with positive numerator for pattern index {index}")]
    ZeroDenominator { index: usize },

    #[error("input measure is not stationary (max violation {violation})")]
    NonStationaryInput { violation: f64 },

    #[error("extension check failed: {0}")]
    ExtensionCheckFailed(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
