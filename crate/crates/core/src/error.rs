use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown space '{0}' (expected S<k>, RP<k>, CP<k>, HP<k>, OP2 or custom:alpha=..,beta=..,kappa=..)")]
    UnknownSpace(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("parse error at position {pos} near '{token}': expected {expected}")]
    Parse { pos: usize, token: String, expected: String },
    #[error("kernel is not integrable on this space: singular exponent {sigma} must be below alpha+1 = {limit}")]
    NonIntegrable { sigma: f64, limit: f64 },
    #[error("value out of range: {0}")]
    Range(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("requested {requested} digits exceeds the precision cap of {cap}")]
    PrecisionCap { requested: u32, cap: u32 },
    #[error("no convergence: {0}")]
    Convergence(String),
    #[error("series tail does not converge at r = 1")]
    DivergentTail,
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
