use thiserror::Error;

/// Errors raised by the numerics in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation. The message
    /// names the violated constraint.
    #[error("domain error: {0}")]
    Domain(String),

    /// A series or quadrature did not reach the requested tolerance.
    #[error("{what} did not converge (achieved estimate {estimate:e})")]
    NonConvergence { what: String, estimate: f64 },

    /// A state vector handed to the oracle is not normalized.
    #[error("state is not normalized: norm = {norm}")]
    Unnormalized { norm: f64 },

    /// Operation requested for a case that is not supported.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Two routes to the same quantity disagree, or a quantity that must be
    /// real carries an imaginary residue.
    #[error("internal consistency check failed: {what} (residue {residue:e})")]
    Consistency { what: String, residue: f64 },

    /// The quantity is mathematically undefined at this point.
    #[error("undefined: {0}")]
    Undefined(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn non_convergence(what: impl Into<String>, estimate: f64) -> Self {
        Error::NonConvergence { what: what.into(), estimate }
    }
}
