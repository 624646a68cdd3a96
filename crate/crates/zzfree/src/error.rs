use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension {0}: need at least 2 levels")]
    InvalidDimension(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("ambiguous labeling of {label}: overlap gap {gap:.3e}")]
    AmbiguousLabeling { label: String, gap: f64 },
    #[error("singular point: {0}")]
    SingularPoint(&'static str),
    #[error("unsupported parameters: {0}")]
    Unsupported(String),
    #[error("hybridization too strong: smallest singular value {0:.3e}")]
    Hybridization(f64),
    #[error("no convergence after {0} iterations")]
    Convergence(usize),
    #[error("step size too large: trace drift {drift:.3e} at t = {t:.3} ns")]
    StepSize { drift: f64, t: f64 },
    #[error("{path}: {reason}")]
    Schema { path: String, reason: String },
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
