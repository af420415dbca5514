use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid parameter {name}: {reason}")]
    InvalidParam { name: &'static str, reason: String },
    #[error("field layout does not match grid ({0})")]
    LayoutMismatch(String),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("unsupported norm exponent {0}")]
    UnsupportedExponent(f64),
    #[error("boundary constraint violated: {0}")]
    ConstraintViolation(String),
    #[error("eigenvalue iteration did not converge: residual {residual:.3e} after {iters} iterations")]
    EigenNonConvergence { residual: f64, iters: usize },
    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("grid too large for dense path: {cells} cells exceeds cap {cap}")]
    DenseCapExceeded { cells: usize, cap: usize },
    #[error("line search failed: step underflow at iteration {iter}")]
    LineSearchFailure { iter: usize },
    #[error("insufficient decay window: norm dropped by factor {drop:.3e}, need >= e^2")]
    InsufficientDecayWindow { drop: f64 },
    #[error("mismatched run configurations: {0}")]
    RunMismatch(String),
    #[error("forcing must be time-independent for this operation")]
    TimeDependentForcing,
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
