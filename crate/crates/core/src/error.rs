use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("node {node} has zero degree; smooth the graph before building a random walk")]
    DegenerateNode { node: usize },

    #[error("graph is not connected ({components} components)")]
    Disconnected { components: usize },

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e}); project it with project_psd_rank first")]
    NotPsd { min_eigenvalue: f64 },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("model assumption violated: {0}")]
    AssumptionViolation(String),

    #[error("optimization diverged (non-finite objective) with learning rate {learning_rate:e}")]
    Divergence { learning_rate: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn shape(expected: (usize, usize), got: (usize, usize)) -> Self {
        Error::ShapeMismatch {
            expected: format!("{}x{}", expected.0, expected.1),
            got: format!("{}x{}", got.0, got.1),
        }
    }
}
