//! Crate-wide error type.
//!
//! The CLI maps these to process exit codes: validation, contract and I/O
//! failures exit with 2, size-guard refusals with 3.

use std::fmt;

#[derive(Debug)]
pub enum Error {
    /// A sender sits exactly on a foreign receiver, which would make the
    /// received power infinite.
    DegenerateGeometry { sender: usize, receiver: usize },
    /// Instance, parameter, or config validation failure.
    Invalid(String),
    /// A documented precondition of an operation does not hold.
    Contract(String),
    /// Input is larger than a hard size guard allows.
    SizeGuard {
        what: &'static str,
        n: usize,
        max: usize,
    },
    /// An iterative solver hit its iteration cap; carries the last iterate.
    Convergence { what: &'static str, last: f64 },
    Io(std::io::Error),
    Json(serde_json::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DegenerateGeometry { sender, receiver } => write!(
                f,
                "degenerate geometry: sender of link {sender} coincides with receiver of link {receiver}"
            ),
            Error::Invalid(msg) => write!(f, "invalid input: {msg}"),
            Error::Contract(msg) => write!(f, "precondition violated: {msg}"),
            Error::SizeGuard { what, n, max } => {
                write!(f, "{what} refuses n = {n} (hard guard: n <= {max})")
            }
            Error::Convergence { what, last } => {
                write!(f, "{what} failed to converge (last iterate {last})")
            }
            Error::Io(e) => write!(f, "i/o error: {e}"),
            Error::Json(e) => write!(f, "json error: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            Error::Json(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
