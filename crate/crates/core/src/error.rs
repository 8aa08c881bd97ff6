use thiserror::Error;

/// Errors produced by the point-set, energy, annealing and evaluation routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("operation not supported on {manifold}: {what}")]
    Unsupported { manifold: String, what: String },

    #[error("empty point set")]
    EmptyPointSet,

    #[error("coincident points {i} and {j} give infinite energy")]
    CoincidentPoints { i: usize, j: usize },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("constraint projection did not converge for particle {particle} after {iterations} iterations (|g| = {residual:e}); try a smaller step size")]
    ProjectionFailed {
        particle: usize,
        iterations: usize,
        residual: f64,
    },

    #[error("singular constraint gradient at particle {0}")]
    SingularConstraint(usize),

    #[error("kernel matrix is not positive definite even after diagonal jitter")]
    SingularKernel,

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Whether the failure is numerical (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonFinite(_)
                | Error::ProjectionFailed { .. }
                | Error::SingularConstraint(_)
                | Error::SingularKernel
                | Error::CoincidentPoints { .. }
        )
    }
}
