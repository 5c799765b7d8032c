use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid size must be odd, got {0}")]
    EvenGridSize(usize),
    #[error("need at least 3 samples per component, got {0}")]
    TooFewSamples(usize),
    #[error("Sobolev level {requested} exceeds maximum {max}")]
    LevelTooHigh { requested: usize, max: usize },
    #[error("difference quotient requires a nonzero step")]
    ZeroStep,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("analytic Jacobian disagrees with finite differences: max relative mismatch {0:.3e}")]
    JacobianMismatch(f64),
    #[error("integrator blowup: norm exceeded {0:.3e}")]
    IntegratorBlowup(f64),
    #[error("input is not an orbit: residual norm {0:.3e}")]
    NotAnOrbit(f64),
    #[error("shooting iteration diverged after {0} steps")]
    ShootingDiverged(usize),
    #[error("seed orbit is degenerate: shooting Jacobian dPhi - I is singular")]
    DegenerateSeed,
    #[error("singular Jacobian (condition estimate {0:.3e})")]
    SingularJacobian(f64),
    #[error("Newton did not converge within {0} iterations")]
    MaxIterExceeded(usize),
    #[error("line search failed to reduce the residual")]
    LineSearchFailed,
    #[error("smoothness diagnostic needs at least {needed} uniform points, got {got}")]
    InsufficientPoints { needed: usize, got: usize },
    #[error("delay {tau:.3e} is below one integrator step {step:.3e}")]
    MinDelayTooSmall { tau: f64, step: f64 },
    #[error("config error: {0}")]
    Config(String),
    #[error("branch file checksum mismatch")]
    ChecksumMismatch,
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
