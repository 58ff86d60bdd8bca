use thiserror::Error;

/// Errors raised by the laboratory's numerical operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Shapes, arities or dimensions do not line up.
    #[error("structural error: {0}")]
    Structural(String),
    /// A scalar parameter lies outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// The input is degenerate (zero vector, all-zero family, ...).
    #[error("degenerate input: {0}")]
    Degenerate(String),
    /// The requested work exceeds a configured budget.
    #[error("budget exceeded: {0}")]
    Budget(String),
    /// A closed-form bound was requested outside its validity range.
    #[error("outside validity range: {0}")]
    Validity(String),
    /// A serialized artifact could not be decoded.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! bail {
    ($kind:ident, $($arg:tt)*) => {
        return Err($crate::error::Error::$kind(format!($($arg)*)))
    };
}

pub(crate) use bail;
