use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failures are split into two classes so callers (and the CLI exit codes)
/// can distinguish bad input from a computation that had to give up.
#[derive(Debug, Error)]
pub enum Error {
    /// Input that fails validation before any real work starts.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A malformed cell or header in a dataset file, with location context.
    #[error("bad data in {path} at row {row}, column {column}: {message}")]
    BadData {
        path: String,
        row: usize,
        column: String,
        message: String,
    },

    /// Too many minipatches contained zero events to produce trustworthy
    /// estimates; raised instead of silently averaging over the remainder.
    #[error(
        "censoring saturation: {skipped} of {total} minipatches contained no events \
         (limit is {limit_percent}%); the data are too heavily censored for this \
         patch size — increase n, enlarge the dataset, or reduce the censoring rate"
    )]
    CensoringSaturation {
        skipped: usize,
        total: usize,
        limit_percent: u32,
    },

    /// An iterative solver ran out of iterations.
    #[error("no convergence after {iterations} iterations (gradient norm {gradient_norm:.3e})")]
    NoConvergence {
        iterations: usize,
        gradient_norm: f64,
    },

    /// Concordance is undefined when no pair of observations is comparable.
    #[error("c-index undefined: no comparable pairs among {n} observations")]
    NoComparablePairs { n: usize },

    /// A feature collected no usable observations during occlusion scoring.
    #[error("feature {feature:?} has zero contributing observations (min_count = {min_count})")]
    ZeroContribution { feature: String, min_count: usize },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors that indicate a computation aborted midway rather than
    /// input that never validated. The CLI maps these to exit code 2.
    pub fn is_abort(&self) -> bool {
        matches!(
            self,
            Error::CensoringSaturation { .. }
                | Error::NoConvergence { .. }
                | Error::NoComparablePairs { .. }
                | Error::ZeroContribution { .. }
        )
    }
}
