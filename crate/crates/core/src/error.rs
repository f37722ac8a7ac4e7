use thiserror::Error;

/// Errors raised by the library.
///
/// Model outcomes such as infeasibility, unboundedness or an arbitrage
/// status are reported through result types, never through this enum.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("space mismatch: {0}")]
    SpaceMismatch(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("guardrail exceeded: {0}")]
    Guardrail(String),

    #[error("simplex stalled after {iterations} iterations")]
    Stalled { iterations: usize },

    #[error("solver could not certify its optimum: {0}")]
    Inaccurate(String),
}

impl Error {
    /// True for failures of the numerical machinery rather than of the input.
    pub fn is_solver_failure(&self) -> bool {
        matches!(self, Error::Stalled { .. } | Error::Inaccurate(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
