use std::path::PathBuf;

use thiserror::Error;

/// Which end of the unit interval an integral fails to converge at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Endpoint {
    Zero,
    One,
}

impl std::fmt::Display for Endpoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Endpoint::Zero => write!(f, "t = 0"),
            Endpoint::One => write!(f, "t = 1"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("row {row}, column '{column}': {message}")]
    Cell {
        row: usize,
        column: String,
        message: String,
    },

    #[error("missing column '{0}' in header")]
    MissingColumn(String),

    #[error("input contains no data rows")]
    EmptyInput,

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("unknown model '{0}'")]
    UnknownModel(String),

    #[error("threshold {0} is outside the open interval (0, 1)")]
    ThresholdOutOfRange(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid weight specification: {0}")]
    InvalidWeightSpec(String),

    #[error("weight specification has point masses and no density; use the cumulative weights W1/W0 instead")]
    NoDensity,

    #[error(
        "{quantity} diverges at {endpoint}; configure an explicit cutoff epsilon, \
         or compare models with the difference operation where the divergent terms cancel"
    )]
    Divergent {
        quantity: &'static str,
        endpoint: Endpoint,
    },

    #[error("density integrates to {mass}, expected 1 within {tolerance:e}")]
    NotADensity { mass: f64, tolerance: f64 },

    #[error("quadrature on [{lo}, {hi}] did not reach tolerance within {panels} panels")]
    QuadratureNotConverged { lo: f64, hi: f64, panels: usize },

    #[error("subject {index}: {message}")]
    LogOfZero { index: usize, message: String },

    #[error("logistic fit did not converge after {iterations} iterations (max change {max_change:e}); {hint}")]
    NonConvergence {
        iterations: usize,
        max_change: f64,
        hint: &'static str,
    },

    #[error("design matrix is singular or not positive definite")]
    SingularDesign,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("{failed} of {total} bootstrap replicates failed (limit 1%); first failure: {first}")]
    TooManyFailedReplicates {
        failed: usize,
        total: usize,
        first: String,
    },

    #[error("exhaustive enumeration supports at most 8 individuals, got {0}")]
    ExhaustiveTooLarge(usize),

    #[error("invalid generator configuration: {0}")]
    InvalidGenerator(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of the numerics (divergence, non-convergence) as
    /// opposed to malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Divergent { .. }
                | Error::QuadratureNotConverged { .. }
                | Error::LogOfZero { .. }
                | Error::NonConvergence { .. }
                | Error::SingularDesign
                | Error::TooManyFailedReplicates { .. }
                | Error::NoDensity
                | Error::NotADensity { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
