//! Error type shared by every module of the crate.

use thiserror::Error;

/// Failures reported by validation, size guards and searches.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter is outside its admissible range.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter {
        name: &'static str,
        reason: String,
    },

    /// A count vector does not add up to the level size it is used with.
    #[error("count vector sums to {actual}, expected {expected}")]
    TotalMismatch { expected: usize, actual: usize },

    /// An outcome matrix is not column-stochastic.
    #[error("outcome matrix column {column} sums to {sum}, expected 1")]
    NotStochastic { column: usize, sum: f64 },

    /// A brute-force routine was asked for a size it refuses to enumerate.
    #[error("size {size} exceeds the limit {limit} for {what}")]
    TooLarge {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    /// A search finished without any admissible point.
    #[error("no solution: {0}")]
    NoSolution(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(invalid(name, format!("{value} is not in [0, 1]")))
    }
}
