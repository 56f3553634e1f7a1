use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed parameters, points outside their space, mismatched measures.
    #[error("invalid input: {0}")]
    Input(String),
    /// Enumeration or support caps exceeded.
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("no convergence after {iterations} iterations (last residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },
    /// A numerical routine broke one of its own invariants.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
