use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("entry ({row}, {col}) out of bounds for a {n_rows}x{n_cols} matrix")]
    IndexOutOfBounds {
        row: usize,
        col: usize,
        n_rows: usize,
        n_cols: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({n_rows}x{n_cols})")]
    NotSquare { n_rows: usize, n_cols: usize },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix is singular: pivot {pivot:e} at elimination step {index}")]
    Singular { index: usize, pivot: f64 },

    #[error("subdomain {subdomain}: interior block is singular ({source})")]
    SingularInterior {
        subdomain: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("BDDC virtual system is singular, more corners are needed ({source})")]
    InsufficientCoarseSpace {
        #[source]
        source: Box<Error>,
    },

    #[error("ILUT: zero pivot in row {row}")]
    ZeroPivot { row: usize },

    #[error("Krylov iteration diverged (NaN detected at iteration {iteration})")]
    Divergence { iteration: f64 },

    #[error("BiCGStab breakdown at iteration {}: {reason}", .partial.iterations)]
    Breakdown {
        reason: String,
        partial: Box<crate::krylov::KrylovResult>,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("post-solve check failed: full-system relative residual {residual:e} exceeds {limit:e}")]
    Verification { residual: f64, limit: f64 },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
