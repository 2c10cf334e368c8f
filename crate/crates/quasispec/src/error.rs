use thiserror::Error;

/// Errors surfaced by construction and solver operations.
#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid domain [{a}, {b}]: endpoints must be finite with a < b")]
    InvalidDomain { a: f64, b: f64 },
    #[error("point {x} outside domain [{a}, {b}]")]
    OutOfDomain { x: f64, a: f64, b: f64 },
    #[error("function sample at x = {x} is not finite")]
    NonFiniteSample { x: f64 },
    #[error("function not resolved to tolerance {tol} within degree cap {cap}")]
    Unresolved { tol: f64, cap: usize },
    #[error("operands live on different domains")]
    DomainMismatch,
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },
    #[error("breakpoints must be strictly increasing and interior to the domain")]
    InvalidBreakpoints,
    #[error("row weights must be positive")]
    NonPositiveWeight,
    #[error("assembled system is numerically rank-deficient; try a different basis")]
    RankDeficient,
    #[error("generalized eigensolver failed (LAPACK info = {0})")]
    GepFailure(i32),
    #[error("total least-squares gap condition violated: sigma_n(B) is not separated from sigma_(n+1)([B A]); the minimal perturbation is non-unique or ill-posed")]
    TlsGapViolated,
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("inner ODE solve failed: {0}")]
    InnerSolve(String),
    #[error("problem file error: {0}")]
    ProblemFile(String),
}

pub type Result<T> = std::result::Result<T, Error>;
