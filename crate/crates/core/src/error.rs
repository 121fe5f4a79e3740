use thiserror::Error;

/// Errors raised by the spectral toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid function: {0}")]
    InvalidFunction(String),

    #[error("Matuszewska indices undefined: {0}")]
    IndexUndefined(String),

    #[error("ordering error: need s0 < s1, got s0 = {s0}, s1 = {s1}")]
    Ordering { s0: f64, s1: f64 },

    #[error(
        "index gate violated: need s0 < {sigma0} - {margin} and s1 > {sigma1} + {margin}, \
         got s0 = {s0}, s1 = {s1} (estimated indices sigma0 = {sigma0}, sigma1 = {sigma1})"
    )]
    OutOfRange {
        s0: f64,
        s1: f64,
        sigma0: f64,
        sigma1: f64,
        margin: f64,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("family structure error: {0}")]
    FamilyStructure(String),

    #[error("near-singular symbol at frequency {frequency:?}: |sigma| = {modulus:e} below {threshold:e}")]
    NearSingular {
        frequency: Vec<i64>,
        modulus: f64,
        threshold: f64,
    },

    #[error("no convergence after {iterations} iterations (relative residual {residual:e})")]
    Convergence {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("empty sample: {0}")]
    EmptySample(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("threshold not found: {0}")]
    ThresholdNotFound(String),

    #[error("residual undefined: {0}")]
    UndefinedResidual(String),

    #[error("parse error at {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
