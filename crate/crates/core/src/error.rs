use thiserror::Error;

/// Errors reported by every fallible operation in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the operation's domain.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The averaging kernel does not satisfy the admissibility conditions
    /// required by the requested quantity.
    #[error("inadmissible kernel: {0}")]
    Inadmissible(String),

    /// Adaptive quadrature ran out of budget before reaching the tolerance.
    #[error(
        "quadrature did not converge: estimate {estimate:e}, error bound {error_bound:e} \
         after {subdivisions} subdivisions"
    )]
    Quadrature {
        estimate: f64,
        error_bound: f64,
        subdivisions: usize,
    },

    /// Any other numerical breakdown (non-finite integrand, failed bracketing, ...).
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn inadmissible(msg: impl Into<String>) -> Self {
        Error::Inadmissible(msg.into())
    }

    /// `true` for input validation failures (as opposed to numerical ones).
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::InvalidInput(_) | Error::Inadmissible(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
