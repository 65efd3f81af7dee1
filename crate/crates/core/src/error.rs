use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid point set: {0}")]
    InvalidPointSet(String),

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("the origin has no children")]
    NoChildren,

    #[error("vertex {0} is not in the surviving set")]
    NotSurviving(usize),

    #[error("{0} surviving colour(s) at radius {1}; sectors need at least two")]
    TooFewColors(usize, f64),

    #[error("colours are not gathered into contiguous arcs at radius {0}")]
    DegenerateTrace(f64),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error(transparent)]
    Fit(#[from] crate::stats::FitError),

    #[error("replicate {index}: {source}")]
    Replicate {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
