//! Error type shared by every module of the crate.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid network configuration: {0}")]
    ConfigInvalid(String),

    #[error("case condition violated: {0}")]
    CaseConditionViolated(String),

    #[error("phase prefactor for parameter {index} is zero; the Fisher matrix is singular")]
    SingularBeta { index: usize },

    #[error("index {index} out of range (valid: {valid})")]
    IndexOutOfRange { index: usize, valid: String },

    #[error("finite-difference step {0:e} is below the cancellation guard 1e-9")]
    StepTooSmall(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("Hilbert-space dimension {dim} exceeds the cap {cap}")]
    DimensionTooLarge { dim: usize, cap: usize },

    #[error("Fock truncation insufficient: tail mass {tail_mass:e} >= 1e-8")]
    TruncationInsufficient { tail_mass: f64 },

    #[error("non-positive input: {0}")]
    NonPositiveInput(&'static str),

    #[error("invalid resource count: {0}")]
    InvalidResourceCount(String),

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid Fisher matrix: {0}")]
    InvalidFisherMatrix(String),

    #[error("probability vanishes with a direction-dependent limit for outcome {outcome}")]
    DegenerateProbability { outcome: usize },

    #[error("maximum-likelihood search did not converge after {iterations} iterations")]
    NotConverged { iterations: usize },

    #[error("likelihood has two local maxima within {gap:e} of each other inside the window")]
    AmbiguousLikelihood { gap: f64 },

    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, Error>;
