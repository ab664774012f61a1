//! Crate-wide error type.

use std::fmt;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug)]
pub enum Error {
    /// An argument violated a documented precondition (non-finite value,
    /// wrong length, empty dataset, ...).
    InvalidArgument(String),
    /// A 6D rotation code could not be orthogonalized (zero or parallel rows).
    DegenerateRotation(String),
    /// Tensor operation applied to incompatible shapes. Reports both.
    ShapeMismatch {
        op: &'static str,
        lhs: Vec<usize>,
        rhs: Vec<usize>,
    },
    /// A file did not parse as the expected format.
    Parse(String),
    /// Checkpoint, skeleton, or clip metadata disagrees with what the
    /// caller asked for.
    ConfigMismatch(String),
    Io(std::io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::DegenerateRotation(msg) => write!(f, "degenerate rotation: {msg}"),
            Error::ShapeMismatch { op, lhs, rhs } => {
                write!(f, "shape mismatch in {op}: {lhs:?} vs {rhs:?}")
            }
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
            Error::ConfigMismatch(msg) => write!(f, "config mismatch: {msg}"),
            Error::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}
