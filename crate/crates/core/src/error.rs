use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of a routine.
    #[error("domain error in {routine}: {detail}")]
    Domain {
        routine: &'static str,
        detail: String,
    },

    /// Kernel evaluated at coincident points.
    #[error("singular evaluation in {0}: source and target coincide")]
    Singular(&'static str),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("accuracy guard: {0}")]
    Accuracy(String),

    #[error(
        "solver did not converge after {iterations} iterations (relative residual {residual:.3e})"
    )]
    NoConvergence {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("format error in {path}: {detail}")]
    Format { path: PathBuf, detail: String },

    #[error("parse error at line {line}: {detail}")]
    Parse { line: usize, detail: String },

    #[error("lookup error: {0}")]
    Lookup(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(routine: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            routine,
            detail: detail.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
