use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the requested quantity.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("series did not converge after {terms} terms (last term {last_term:e})")]
    NonConvergence { terms: usize, last_term: f64 },

    /// Adaptive quadrature exhausted its subdivision budget.
    #[error("tolerance not met: estimate {value} with error {err_estimate:e} after {subdivisions} subdivisions")]
    ToleranceNotMet {
        value: f64,
        err_estimate: f64,
        subdivisions: usize,
    },

    #[error("non-finite value {value} at {location}")]
    NonFinite { location: String, value: f64 },

    /// Two large terms cancelled beyond the representable precision.
    #[error("ill-conditioned evaluation of {what}: {digits:.1} digits lost to cancellation")]
    IllConditioned { what: &'static str, digits: f64 },

    #[error("time grid too coarse: recursion residual {residual:e} exceeds {tolerance:e}")]
    GridTooCoarse { residual: f64, tolerance: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for precondition violations, false for numerical failures.
    pub fn is_domain(&self) -> bool {
        matches!(self, Error::Domain(_) | Error::Config(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
