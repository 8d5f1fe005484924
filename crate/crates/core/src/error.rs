use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// The caller passed something malformed or out of range.
    InvalidInput,
    /// A numerical procedure failed (singularity, blow-up, non-convergence).
    Numerical,
    /// An internal consistency check failed.
    Internal,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("expected a classical observable, found hbar-graded terms")]
    NotClassical,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error at offset {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("singular approach at t = {time}: {detail}")]
    SingularApproach { time: f64, detail: String },

    #[error("step size underflow (stiff or singular problem) at t = {time}, h = {step:e}")]
    Stiffness { time: f64, step: f64 },

    #[error("finite-time escape at t = {time}: |entry| = {magnitude:e}")]
    FiniteTimeEscape { time: f64, magnitude: f64 },

    #[error("no return to the initial state: {0}")]
    NoReturn(String),

    #[error("no convergence (residual {residual:e}): {detail}")]
    NonConvergence { residual: f64, detail: String },

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::DimensionMismatch { .. }
            | Error::NotClassical
            | Error::InvalidInput(_)
            | Error::Unsupported(_)
            | Error::Parse { .. }
            | Error::Io(_) => ErrorKind::InvalidInput,
            Error::SingularApproach { .. }
            | Error::Stiffness { .. }
            | Error::FiniteTimeEscape { .. }
            | Error::NoReturn(_)
            | Error::NonConvergence { .. } => ErrorKind::Numerical,
            Error::InvariantViolation(_) => ErrorKind::Internal,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
