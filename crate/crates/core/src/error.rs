use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("truncation discards population {discarded:.3e}, above the bound {bound:.3e}")]
    TruncationLeakage { discarded: f64, bound: f64 },

    #[error("Fock cutoff of mode {mode} would exceed its maximum of {max}")]
    TruncationOverflow { mode: usize, max: usize },

    #[error("integration failed at t = {time:.6e} s: {reason}")]
    IntegrationFailure { time: f64, reason: String },

    #[error("degenerate design: {0}")]
    DegenerateDesign(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error("noise budget undefined: {0}")]
    UndefinedBudget(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
