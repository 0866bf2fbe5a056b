use thiserror::Error;

/// Errors raised anywhere in the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),

    #[error("duplicate subsystem label `{0}`")]
    DuplicateLabel(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("invalid cutoff {0}: must be at least 1")]
    InvalidCutoff(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("consistency condition violated for {name}: {lhs} vs {rhs}")]
    Consistency { name: &'static str, lhs: String, rhs: String },

    #[error("tier {tier} is not available for this request: {reason}")]
    TierMismatch { tier: String, reason: String },

    #[error("step size underflow at t = {t}: h = {h:e}")]
    StepUnderflow { t: f64, h: f64 },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("state norm vanished at t = {0}")]
    ZeroNorm(f64),

    #[error("no Liouvillian kernel found (smallest singular value {smallest:e}, threshold {threshold:e})")]
    NoKernel { smallest: f64, threshold: f64 },

    #[error("excited-state leakage {leakage} exceeds threshold {threshold}")]
    Leakage { leakage: f64, threshold: f64 },

    #[error("time ranges do not overlap")]
    DisjointRanges,

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit status: 2 for bad input, 3 for solver failures, 4 for
    /// violated physical invariants.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::StepUnderflow { .. } | Error::ZeroNorm(_) | Error::NoKernel { .. } | Error::DisjointRanges => 3,
            Error::Io(_) | Error::Json(_) => 3,
            Error::Invariant(_) | Error::Leakage { .. } => 4,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
