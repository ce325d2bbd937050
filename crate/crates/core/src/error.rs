use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("signature cannot supply the requested vectors: {0}")]
    SignatureUnavailable(String),

    #[error(
        "orthogonal complement is degenerate: only {found} of {wanted} directions are non-null"
    )]
    DegenerateComplement { found: usize, wanted: usize },

    #[error("H = {h} is outside the domain of {curve}")]
    DomainError { curve: String, h: f64 },

    #[error("profile left the positive half-line at t = {t} (g = {g})")]
    DomainExit { t: f64, g: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),
}

pub type Result<T> = std::result::Result<T, Error>;
