use thiserror::Error;

/// Errors raised by the numerical kernels and experiment drivers.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an argument failed. `what` names the argument.
    #[error("invalid {what}: {reason}")]
    Invalid { what: &'static str, reason: String },

    /// A discretisation guard (grid resolution, band limit, ...) was violated.
    #[error("guard violated: {0}")]
    Guard(String),

    /// Quadrature refinement did not reach the requested accuracy.
    #[error("quadrature did not converge: relative error estimate {estimate:.3e} exceeds {tolerance:.1e}")]
    NonConvergence { estimate: f64, tolerance: f64 },

    /// The requested combination is not offered by the selected strategy.
    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("unknown {kind} `{name}` (known: {known})")]
    UnknownName {
        kind: &'static str,
        name: String,
        known: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            reason: reason.into(),
        }
    }

    /// True for failures that stem from numerical non-convergence rather
    /// than from bad input.
    pub fn is_non_convergence(&self) -> bool {
        matches!(self, Error::NonConvergence { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
