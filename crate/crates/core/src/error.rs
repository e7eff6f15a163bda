use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("pole: {0}")]
    Pole(String),

    #[error("no convergence after {iterations} iterations: {detail}")]
    Convergence { iterations: usize, detail: String },

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("fit rejected: {detail} (periodicity defect {defect:e})")]
    NotASolution { defect: f64, detail: String },

    #[error("divergent series: {0}")]
    Divergence(String),

    #[error("input error: {0}")]
    Input(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn convergence(iterations: usize, detail: impl Into<String>) -> Self {
        Error::Convergence {
            iterations,
            detail: detail.into(),
        }
    }

    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::Pole(_) | Error::NotASolution { .. } | Error::Input(_) => 1,
            Error::Convergence { .. } | Error::Resource(_) | Error::Divergence(_) => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
