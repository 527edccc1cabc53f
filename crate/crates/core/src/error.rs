use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("coupling lambda = {lambda} outside [0, {limit}] (omega_a = {omega_a})")]
    CouplingOutOfRange {
        lambda: f64,
        omega_a: f64,
        limit: f64,
    },

    #[error("non-positive frequency: {0}")]
    NonPositiveFrequency(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid bath specification: {0}")]
    InvalidBath(String),

    #[error("truncation too small: {0}")]
    TruncationTooSmall(String),

    #[error("overlap index ({m}, {m_prime}) beyond the stable window {window}")]
    OverflowRisk {
        m: usize,
        m_prime: usize,
        window: usize,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("singular steady-state solve: {0}")]
    SingularSolve(String),

    #[error("eigenvalue iteration failed to converge: {0}")]
    ConvergenceFailure(String),

    #[error("finite-difference step {step} too large: exp(step * dE_max) = {growth:.3e} > 1e3")]
    StepTooLarge { step: f64, growth: f64 },

    #[error("truncation unconverged up to N = {max_n} (last relative change {last_change:.3e} in {observable})")]
    TruncationUnconverged {
        max_n: usize,
        last_change: f64,
        observable: String,
    },

    #[error("rectification undefined: both currents are zero")]
    BothCurrentsZero,

    #[error("weak-coupling sum did not converge within {0} terms")]
    CutoffUnconverged(usize),

    #[error("curve has {0} points, at least 5 are required")]
    TooFewPoints(usize),

    #[error("unknown preset '{0}'")]
    UnknownPreset(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
