//! Shared error type for the analysis kernels.

use std::fmt;

/// Everything fallible in this crate reports one of these variants.
///
/// The split matters to callers: `InvalidInput` is a caller mistake,
/// `NumericFailure` means an iteration ran out of budget or lost precision,
/// `Inconclusive` means a numeric procedure terminated without certifying a
/// value, and `NotApplicable` means the requested quantity is undefined for
/// the given data (for example a lower bound at a point where `phi` is zero).
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    InvalidInput(String),
    NumericFailure { what: String, residual: f64 },
    Inconclusive { what: String },
    NotApplicable(String),
}

impl Error {
    pub fn invalid_input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn numeric(what: impl Into<String>, residual: f64) -> Self {
        Error::NumericFailure { what: what.into(), residual }
    }

    pub fn inconclusive(what: impl Into<String>) -> Self {
        Error::Inconclusive { what: what.into() }
    }

    pub fn not_applicable(msg: impl Into<String>) -> Self {
        Error::NotApplicable(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::NumericFailure { what, residual } => {
                write!(f, "numeric failure in {what} (residual {residual:e})")
            }
            Error::Inconclusive { what } => write!(f, "inconclusive: {what}"),
            Error::NotApplicable(msg) => write!(f, "not applicable: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
