use thiserror::Error;

/// Errors raised by the separation toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("polynomial degree {degree} exceeds cap {cap}; use the numeric evaluation path")]
    DegreeCapExceeded { degree: u32, cap: u32 },

    #[error("group closure exceeded {cap} elements")]
    GroupTooLarge { cap: usize },

    #[error("element is not invertible")]
    NotInvertible,

    #[error("generated set is not a group: {0}")]
    NotAGroup(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("polynomial does not separate: sup on set {sup} vs |Q(z)| = {value}")]
    NotSeparating { sup: f64, value: f64 },

    #[error("no linear functional separates the point from the balanced hull (distance {distance})")]
    InsideHull { distance: f64 },

    #[error("exponent search exhausted at m_max = {m_max}")]
    Exhausted { m_max: u64 },

    #[error("angle set lacks exact rational representations")]
    MissingRationalForm,

    #[error("no scheduled truncation is usable: {0}")]
    Truncation(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
