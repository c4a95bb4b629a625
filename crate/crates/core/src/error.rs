use thiserror::Error;

/// Errors raised by the parameterization maps and the applications built on them.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An angle or parameter magnitude lies outside a generating function's validity range.
    #[error("domain error: {0}")]
    Domain(String),

    /// A coefficient or matrix factor is undefined or not invertible at the requested point.
    #[error("singularity: {0}")]
    Singularity(String),

    /// A user-supplied value violates a structural constraint (group membership, coupling condition).
    #[error("constraint violated: {0}")]
    Constraint(String),

    /// The alignment normal equations are singular or too badly conditioned to solve.
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    /// Malformed textual input (names, CSV rows, vectors).
    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
