use thiserror::Error;

/// Errors raised by the simulator library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid dimension must be 1 or 2, got {0}")]
    InvalidDimension(usize),
    #[error("expected {expected} values per axis, got {got}")]
    AxisCount { expected: usize, got: usize },
    #[error("extent along axis {axis} must be positive and finite, got {value}")]
    NonPositiveExtent { axis: usize, value: f64 },
    #[error("axis {axis} needs at least 4 cells, got {cells}")]
    TooFewCells { axis: usize, cells: usize },
    #[error("field has {got} values but the grid has {expected} cells")]
    LengthMismatch { expected: usize, got: usize },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("norm exponent must be >= 1 or infinite, got {0}")]
    InvalidExponent(f64),
    #[error("parameter {name} = {value} violates {requirement}")]
    Parameter {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },
    #[error("field {0} must be nonnegative")]
    Negative(&'static str),
    #[error("linear solve did not reach tolerance {tolerance:e}: residual {residual:e} after {iterations} iterations")]
    SolverFailure {
        residual: f64,
        tolerance: f64,
        iterations: usize,
    },
    #[error("comparison ordering 0 < lower < xi < upper violated at t = {t} after {halvings} step halvings")]
    OrderingViolation { t: f64, halvings: usize },
    #[error("gap between super- and sub-solution does not decay; no rate")]
    NoRate,
    #[error("empty sweep axis {0}")]
    EmptySweep(&'static str),
    #[error("I/O error on {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        Error::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}
