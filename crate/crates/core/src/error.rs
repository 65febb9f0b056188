use thiserror::Error;

/// Errors raised by the algorithms in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum OrbitError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("unknown label at pixel {pixel} where only land/water/missing are allowed")]
    UnknownLabel { pixel: usize },

    #[error("missing label at pixel {pixel} where a complete labelling is required")]
    MissingLabel { pixel: usize },

    #[error("inconsistent labels: water at rank {water_rank} is shallower than land at rank {land_rank}")]
    Inconsistent { water_rank: usize, land_rank: usize },

    #[error("malformed file: {field}: {detail}")]
    Format { field: &'static str, detail: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for OrbitError {
    fn from(e: std::io::Error) -> Self {
        OrbitError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, OrbitError>;

pub(crate) fn invalid(msg: impl Into<String>) -> OrbitError {
    OrbitError::InvalidInput(msg.into())
}

pub(crate) fn mismatch(expected: impl ToString, found: impl ToString) -> OrbitError {
    OrbitError::DimensionMismatch {
        expected: expected.to_string(),
        found: found.to_string(),
    }
}

pub(crate) fn format_err(field: &'static str, detail: impl Into<String>) -> OrbitError {
    OrbitError::Format {
        field,
        detail: detail.into(),
    }
}
