use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    /// Two objects that must live on the same grid (or have matching
    /// dimensions) do not.
    #[error("structural mismatch: {0}")]
    Structural(String),

    /// A mathematically undefined request, e.g. a relative error against a
    /// zero reference.
    #[error("domain error: {0}")]
    Domain(String),

    /// Parameters violating a documented constraint.
    #[error("invalid parameter: {0}")]
    Validation(String),

    /// LU factorization met a pivot that is numerically zero.
    #[error("numerically singular pivot at index {index} (|pivot| = {magnitude:e})")]
    SingularPivot { index: usize, magnitude: f64 },

    /// A regularized solve inside a sweep did not converge.
    #[error("regularized solve did not converge at a = {a:e} (residual {residual:e})")]
    NotConverged { a: f64, residual: f64 },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
