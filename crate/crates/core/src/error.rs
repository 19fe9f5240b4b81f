use thiserror::Error;

/// Errors raised by the distribution, series and inference routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("series did not converge after {terms} terms (partial sum {partial:e})")]
    NonConvergence { terms: usize, partial: f64 },

    #[error(
        "mixture term budget exhausted after {terms} terms (partial sum {partial:e}, last shell {last_shell:e})"
    )]
    BudgetExhausted {
        terms: usize,
        partial: f64,
        last_shell: f64,
    },

    #[error("hazard overflow: survival underflows to zero at x = {0}")]
    HazardOverflow(f64),

    #[error("expectation is not integrable: {0}")]
    NotIntegrable(String),

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("optimizer failure: {0}")]
    Optimizer(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
