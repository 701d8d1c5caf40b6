//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by model construction, simulation and optimization.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated a documented precondition or invariant.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The requested problem has no feasible solution.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// The ODE integrator failed; `t` is the last valid time reached.
    #[error("numerical failure at t = {t}: {reason}")]
    Numerical { t: f64, reason: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
