use thiserror::Error;

/// Errors raised by the estimation toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositiveSemidefinite(f64),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("derivative has weight {0:e} on the kernel of the state")]
    SupportViolation(f64),

    #[error("states do not form an orthonormal basis: {0}")]
    InvalidBasis(String),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("degenerate model: {0}")]
    DegenerateModel(String),

    #[error("numerical inconsistency: {0}")]
    NumericalInconsistency(String),

    #[error("susceptibility is undefined: {0}")]
    UndefinedSusceptibility(String),

    #[error("no feasible point in the search grid")]
    NoFeasiblePoint,

    #[error("malformed JSON: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dim(expected: usize, found: usize) -> Self {
        Error::DimensionMismatch { expected, found }
    }
}
