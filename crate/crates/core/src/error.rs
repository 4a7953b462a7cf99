use thiserror::Error;

/// Errors raised by oracles, the engine, step rules and instance construction.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite entry in input vector")]
    NonFinite,

    #[error("point outside the domain of {0}")]
    Domain(String),

    #[error("step size is not admissible: {0}")]
    NotAdmissible(String),

    #[error("no closed-form subproblem solver for reference `{reference}` with `{simple}`")]
    UnsupportedPair { reference: String, simple: String },

    #[error("iterate coordinate underflowed below 1e-300")]
    Underflow,

    #[error("backtracking failed at iteration {k}: condition still violated at t = {t_min:e}")]
    BacktrackFailed { k: usize, t_min: f64 },

    #[error("step size must be positive and finite, got {0}")]
    InvalidStep(f64),

    #[error("certificate requires at least one iteration")]
    NoIterations,

    #[error("method and instance are incompatible: {0}")]
    Incompatible(String),

    #[error("unknown instance `{0}`")]
    UnknownInstance(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("rate fit needs at least {needed} usable rows, found {usable}")]
    InsufficientData { usable: usize, needed: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
