use thiserror::Error;

/// Errors raised by the spectral operators, solvers and diagnostics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("grid size {0} is invalid (must be even and >= 8)")]
    InvalidGrid(usize),

    #[error("grid mismatch: {left} vs {right} points per axis")]
    GridMismatch { left: usize, right: usize },

    #[error("physical buffer has {got} values, expected {expected}")]
    BufferLength { expected: usize, got: usize },

    #[error("state invariant violated: {what} = {value:e} exceeds tolerance {tol:e}")]
    InvariantViolation {
        what: &'static str,
        value: f64,
        tol: f64,
    },

    #[error("time step {dt:e} violates the advective CFL limit {limit:e}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("non-finite value detected at t = {t}")]
    NonFinite { t: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("need at least {needed} samples, got {got}")]
    NotEnoughSamples { needed: usize, got: usize },

    #[error("time mismatch: {left} vs {right}")]
    TimeMismatch { left: f64, right: f64 },

    #[error("unknown initial condition `{0}`")]
    UnknownInitialCondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
