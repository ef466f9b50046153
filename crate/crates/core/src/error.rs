use thiserror::Error;

/// Errors raised by problem evaluation and solver setup.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A component produced a non-finite value or gradient entry.
    #[error("component {index} is not finite at the query point ({what})")]
    Evaluation { index: usize, what: &'static str },

    /// A scalar or structural parameter is outside its admissible range.
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    /// A vector has the wrong number of entries.
    #[error("dimension mismatch for `{name}`: expected {expected}, got {got}")]
    Dimension {
        name: &'static str,
        expected: usize,
        got: usize,
    },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
