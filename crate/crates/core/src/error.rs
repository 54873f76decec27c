use thiserror::Error;

/// Errors produced by the solvers and the file formats.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Caller violated a precondition (shape, rank, flag value).
    #[error("usage error: {0}")]
    Usage(String),

    /// A linear subsystem had no usable solution.
    #[error("degenerate system: {0}")]
    DegenerateSystem(String),

    /// A row subproblem of a fixed-factor solve was degenerate.
    #[error("degenerate system in row {row}: {reason}")]
    DegenerateRow { row: usize, reason: String },

    /// The exchange loop ran past its iteration cap.
    #[error("exchange did not terminate within {0} iterations")]
    NonTermination(usize),

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub fn degenerate(msg: impl Into<String>) -> Self {
        Error::DegenerateSystem(msg.into())
    }

    /// True for both the untagged and the row-tagged degenerate variants.
    pub fn is_degenerate(&self) -> bool {
        matches!(self, Error::DegenerateSystem(_) | Error::DegenerateRow { .. })
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
