use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("{spins} spins exceed the dimension cap of {cap}")]
    DimensionCap { spins: usize, cap: usize },

    #[error("integration failure: norm drift {norm_drift:e} exceeds tolerance")]
    IntegrationFailure { norm_drift: f64 },

    #[error("no admissible critical point found (residuals of the closest Newton run {residuals:?})")]
    SolverFailure { residuals: [f64; 3] },

    #[error("least-squares design matrix is singular")]
    DegenerateFit,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
