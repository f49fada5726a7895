use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("entry ({row}, {col}) = {value} outside [{low}, {high}]")]
    RangeViolation {
        row: usize,
        col: usize,
        value: f64,
        low: f64,
        high: f64,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("negative pre-selection frequency {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("population goes extinct: mean fitness {0} <= 0")]
    Extinction(f64),

    #[error("generation {generation}: {source}")]
    AtGeneration {
        generation: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("singular matrix")]
    Singular,

    #[error("support enumeration too large: {0} supports (limit {1})")]
    EnumerationTooLarge(u128, u128),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
