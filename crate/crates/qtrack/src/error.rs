use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not positive semidefinite (eigenvalue {0:.3e})")]
    NotPsd(f64),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("degenerate geometry: {0}")]
    Degenerate(String),
    #[error("optimality certificate failed: {0}")]
    Optimality(String),
    #[error("solver failure: {0}")]
    Solver(String),
}

impl Error {
    /// True for failures of a numerical method rather than of the inputs.
    pub fn is_solver(&self) -> bool {
        matches!(self, Error::Solver(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
