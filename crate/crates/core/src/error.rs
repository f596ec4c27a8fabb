use thiserror::Error;

/// Errors raised by the solvers, data constructors and verifiers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported spatial dimension {0}; expected 1, 2 or 3")]
    UnsupportedDimension(usize),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("singular evaluation: {0}")]
    Singular(String),

    #[error("grid invariant violated: {0}")]
    Grid(String),

    #[error("non-finite value in {field} at t = {t}")]
    NonFinite { field: String, t: f64 },

    #[error("support reached the grid boundary at t = {t}")]
    BoundaryReached { t: f64 },

    #[error("region outside computed data: {0}")]
    Region(String),

    #[error("picard iteration is not contracting (last distance ratio {ratio:.4})")]
    NonContraction { ratio: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("sweep run for eps = {eps} aborted: {source}")]
    RunAborted { eps: f64, source: Box<Error> },
}

pub type Result<T> = std::result::Result<T, Error>;
