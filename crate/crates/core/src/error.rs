use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("stability error: {0}")]
    Stability(String),

    /// A weight was non-positive at lag `lag` (1-based).
    #[error("PositivityError: psi_{lag} = {value:e} is not positive")]
    Positivity { lag: usize, value: f64 },

    /// Conditional variance left the representable range at step `t` (1-based, burn-in included).
    #[error("overflow: conditional variance not finite at t = {t}")]
    Overflow { t: usize },

    #[error("weights sum to {sum} >= 1; pass allow_nonstationary to simulate anyway")]
    NonStationary { sum: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("SingularHessian: eigenvalues {eigenvalues:?}")]
    SingularHessian { eigenvalues: Vec<f64> },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
