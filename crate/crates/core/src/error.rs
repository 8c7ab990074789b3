use thiserror::Error;

/// Errors from the numerical core (transforms, sensing, recovery, codec).
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown filter {family}-{taps}")]
    UnknownFilter { family: &'static str, taps: usize },

    #[error("unknown wavelet name `{0}`")]
    UnknownWavelet(String),

    #[error("filter {name} fails validation: {what}")]
    InvalidFilter { name: String, what: String },

    #[error("non-dyadic input: {0}")]
    NonDyadic(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index {index} out of range for {len} rows")]
    IndexOutOfRange { index: usize, len: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
