use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid operator: {0}")]
    InvalidOperator(String),
    #[error("window mismatch: half sizes {0} and {1}")]
    WindowMismatch(usize, usize),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("ambiguous cell: singular value {sigma:e} within 10x of rank tolerance {tol:e}")]
    AmbiguousCell { sigma: f64, tol: f64 },
    #[error("singular matrix")]
    Singular,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
