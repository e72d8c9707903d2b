use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension overflow: {0}")]
    Overflow(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("operator is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("operator is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("operator is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("trace is {trace}, expected 1")]
    Trace { trace: f64 },

    #[error("Bloch vector has norm {norm} > 1")]
    InvalidBloch { norm: f64 },

    #[error("POVM is not minimal informationally complete: Gram rank {rank}, need {expected}")]
    NotInformationallyComplete { rank: usize, expected: usize },

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("probabilities sum to {sum}, expected 1")]
    Normalization { sum: f64 },

    #[error("operator has no negative eigenvalue (smallest {min_eigenvalue:e})")]
    NotAWitness { min_eigenvalue: f64 },

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("every posterior weight vanished")]
    DegeneratePosterior,

    #[error("prior support: {0}")]
    PriorSupport(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
