use thiserror::Error;

/// Errors raised by the analysis and simulation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("no positive equilibrium for gamma = {gamma} (requires gamma > 2)")]
    NoPositiveEquilibrium { gamma: f64 },

    #[error("argument {name} = {value} is outside the domain of the model ({reason})")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("wave speed must be positive and finite, got c = {c}")]
    InvalidSpeed { c: f64 },

    #[error("tension scale must be positive and finite, got omega = {omega}")]
    InvalidOmega { omega: f64 },

    #[error("rotation angle undefined at an equilibrium (u = {u}, v = {v})")]
    UndefinedAngle { u: f64, v: f64 },

    #[error("step size underflow at xi = {xi} (h = {h})")]
    StepUnderflow { xi: f64, h: f64 },

    #[error("seed point at ({u}, {v}) lies outside the physical quadrant")]
    SeedBranch { u: f64, v: f64 },

    #[error("stencil stability guard violated: {reason} (value {value})")]
    StabilityGuard { reason: &'static str, value: f64 },

    #[error("tridiagonal operator is singular at row {row}")]
    SingularOperator { row: usize },

    #[error("non-finite value in field `{field}` at index {index}, tau = {tau}")]
    NonFinite {
        field: &'static str,
        index: usize,
        tau: f64,
    },

    #[error("no front found at level {level} in snapshot at tau = {tau}")]
    NoFront { level: f64, tau: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("{0}")]
    Usage(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
