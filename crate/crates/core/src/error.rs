//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// A single defect found while validating a candidate model.
///
/// Validation reports every violation it finds rather than stopping at the
/// first, so these are collected into a `Vec` inside [`Error::InvalidModel`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelViolation {
    #[error("model declares no states")]
    NoStates,

    #[error("duplicate state name `{0}`")]
    DuplicateState(String),

    #[error("state `{0}` is referenced but never declared")]
    UnknownState(String),

    #[error("discount factor {0} outside [0, 1]")]
    GammaOutOfRange(f64),

    #[error("state `{state}` has no actions")]
    EmptyActionSet { state: String },

    #[error("state `{state}` declares action `{action}` more than once")]
    DuplicateActionId { state: String, action: String },

    #[error("action `{action}` at state `{state}`: probabilities sum to {sum}, expected 1")]
    PmfNotNormalized {
        state: String,
        action: String,
        sum: f64,
    },

    #[error("action `{action}` at state `{state}`: probability {prob} for successor `{successor}` is negative")]
    NegativeProbability {
        state: String,
        action: String,
        successor: String,
        prob: f64,
    },

    #[error("action `{action}` at state `{state}`: successor `{successor}` is not a declared state")]
    UnknownSuccessorState {
        state: String,
        action: String,
        successor: String,
    },

    #[error("action `{action}` at state `{state}`: {context} is not a finite number")]
    NonFiniteNumber {
        state: String,
        action: String,
        context: String,
    },
}

/// Errors raised by model construction, slice evaluation, linear algebra, and
/// the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid model: {}", format_violations(.0))]
    InvalidModel(Vec<ModelViolation>),

    #[error("action `{action}` is not valid at state {state}")]
    ActionNotValid { state: usize, action: String },

    #[error("policy space has {count} policies, exceeding the cap of {cap}")]
    PolicySpaceTooLarge { count: u128, cap: u128 },

    #[error("invalid policy: {0}")]
    InvalidPolicy(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("discount factor {0} outside the open interval (0, 1) required here")]
    GammaOutOfRange(f64),

    #[error("discount factor {0} is not contractive (requires gamma < 1)")]
    GammaNotContractive(f64),

    #[error("no convergence guarantee: gamma = 1 and termination is not inevitable under this policy")]
    NoConvergenceGuarantee,

    #[error("tolerance {0} must be positive")]
    InvalidTolerance(f64),

    #[error("spectral radius not bounded below 1 (certified bound {0})")]
    SpectralRadiusNotBounded(f64),

    #[error("residual {residual} exceeds tolerance {tol}")]
    ResidualTooLarge { residual: f64, tol: f64 },

    #[error("iteration cap of {cap} exceeded")]
    IterationCapExceeded { cap: usize },

    #[error("matrix is singular (pivot {pivot} at column {column})")]
    SingularMatrix { column: usize, pivot: f64 },
}

fn format_violations(violations: &[ModelViolation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
