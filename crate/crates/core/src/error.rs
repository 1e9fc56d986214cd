use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NonSymmetric { asymmetry: f64 },

    #[error("non-finite value encountered in {context}")]
    NonFinite { context: String },

    #[error("right-hand matrix is numerically singular (min eigenvalue {min:e}, max eigenvalue {max:e})")]
    SingularB { min: f64, max: f64 },

    #[error("matrix has no positive eigenvalue (largest is {max:e})")]
    AllDegenerate { max: f64 },

    #[error("row rank {rank} is below the required {expected}")]
    RankDeficient { rank: usize, expected: usize },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("cluster {0} has no members")]
    EmptyCluster(usize),

    #[error("infeasible dual variables: {0}")]
    InfeasibleAlpha(String),

    #[error("C = {c} is infeasible for {n} samples (need N*C >= 1)")]
    InfeasibleC { c: f64, n: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("class {class:?} has {count} samples, at least 2 are required")]
    TooFewSamples { class: String, count: usize },

    #[error("ground truth must contain both positive and negative samples")]
    DegenerateTruth,

    #[error("all paired differences are zero")]
    AllZeroDifferences,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("no grid point produced a usable model")]
    NoViableGridPoint,

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("row {row} has {found} fields, expected {expected}")]
    RaggedRows {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("model document: {0}")]
    Model(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn non_finite(context: impl Into<String>) -> Self {
        Error::NonFinite {
            context: context.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by the numbers rather than the inputs' shape or the configuration.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NonSymmetric { .. }
                | Error::NonFinite { .. }
                | Error::SingularB { .. }
                | Error::AllDegenerate { .. }
                | Error::RankDeficient { .. }
                | Error::InfeasibleAlpha(_)
                | Error::NoViableGridPoint
        )
    }
}
