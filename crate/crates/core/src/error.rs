use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A state or coefficient vector violates a construction invariant.
    #[error("invariant violated: {0}")]
    Invariant(String),

    /// Shapes or party counts do not agree.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no parties kept")]
    NoPartiesKept,

    /// Enumeration refused because it would blow up combinatorially.
    #[error("enumeration over {n} parties exceeds the cap of {cap}")]
    TooLarge { n: usize, cap: usize },

    /// A radicand or eigenvalue is negative far beyond rounding noise.
    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
