use thiserror::Error;

/// Errors raised by the decomposition, control and simulation routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (residual {residual:.3e} exceeds {tolerance:.3e})")]
    NotHermitian { residual: f64, tolerance: f64 },

    #[error("matrix is not unitary (residual {residual:.3e} exceeds {tolerance:.3e})")]
    NotUnitary { residual: f64, tolerance: f64 },

    #[error("vector is not normalized (norm {norm:.15} deviates by more than {tolerance:.3e})")]
    NotNormalized { norm: f64, tolerance: f64 },

    #[error("input is not symmetric (residual {residual:.3e} exceeds {tolerance:.3e})")]
    NotSymmetric { residual: f64, tolerance: f64 },

    #[error("{what} is singular at {at} (within {tolerance:.1e} of a pole)")]
    SingularFormula {
        what: &'static str,
        at: f64,
        tolerance: f64,
    },

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("ill-conditioned linear system: smallest retained singular value {smallest:.3e} (relative), cutoff {cutoff:.1e}")]
    IllConditioned { smallest: f64, cutoff: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("abnormal extremal: adjoint vector vanishes")]
    Abnormal,

    #[error("selection policy deadlock at unstable equilibrium t = {time}; configure a dwell time")]
    PolicyDeadlock { time: f64 },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
