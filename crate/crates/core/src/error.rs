use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (max |m - m†| = {0:e})")]
    NotHermitian(f64),
    #[error("matrix is not skew-Hermitian (max |x + x†| = {0:e})")]
    NotSkewHermitian(f64),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("rank mismatch: {0}")]
    RankMismatch(String),
    #[error("argument outside the domain: {0}")]
    Domain(String),
    #[error("numerical inconsistency: {0}")]
    Numerical(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
