use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("truncation overflow on mode {mode}: weight {weight:.3e} pushed above the cutoff")]
    TruncationOverflow { mode: usize, weight: f64 },

    #[error("invalid mode index {mode} for a {modes}-mode state")]
    InvalidMode { mode: usize, modes: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("quadrature weight xi must be nonzero")]
    ZeroXi,

    #[error("number pair requires k1 > k2 (got k1 = {k1}, k2 = {k2})")]
    InvalidOrder { k1: usize, k2: usize },

    #[error("squeezer leaked norm {leaked:.3e} beyond the truncation (limit {limit:.1e})")]
    LeakageExceeded { leaked: f64, limit: f64 },

    #[error("amplifier rates and time must be non-negative ({0})")]
    NegativeRate(String),

    #[error("trace drifted to {trace:.12} during master-equation integration")]
    TraceDrift { trace: f64 },

    #[error("unknown beam-splitter input class `{0}`")]
    UnknownInputClass(String),

    #[error("eta must be >= 1 (got {0})")]
    InvalidEta(f64),

    #[error("formula domain violation: {0}")]
    DomainViolation(String),

    #[error("formula branch violation: {0}")]
    BranchViolation(String),

    #[error("expected a {expected}-mode state, got {got} modes")]
    WrongModeCount { expected: usize, got: usize },

    #[error("state is not normalized (norm^2 = {0:.12})")]
    NotNormalized(f64),

    #[error("invalid density operator: {0}")]
    InvalidDensity(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
