use thiserror::Error;

/// Errors raised by the simulation and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("paths do not share a common time grid")]
    MismatchedGrids,
    #[error("invalid scales: {0}")]
    InvalidScales(String),
    #[error("invalid probability vector: {0}")]
    InvalidProbabilities(String),
    #[error("degenerate regression: {0}")]
    DegenerateFit(String),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("linear solver failed to converge after {iterations} iterations (residual {residual:e})")]
    SolverDiverged { iterations: usize, residual: f64 },
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
