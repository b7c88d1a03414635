use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid band set: {0}")]
    InvalidBandSet(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid Jacobi parameters: {0}")]
    InvalidParams(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid Dirichlet data: {0}")]
    InvalidDirichlet(String),

    #[error("invalid perturbation: {0}")]
    InvalidPerturbation(String),

    /// Requested accuracy could not be reached (too close to a singularity,
    /// refinement did not converge, ...).
    #[error("accuracy failure: {0}")]
    Accuracy(String),

    /// A linear solve or root bracket failed on input that passed validation.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Coefficients were requested beyond what the sequence can supply.
    #[error("coefficients unavailable: requested {requested}, available {available}")]
    Unavailable { requested: usize, available: usize },

    /// A constructed object violates one of its own invariants.
    #[error("invariant violation: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;
