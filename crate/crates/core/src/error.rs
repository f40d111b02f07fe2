use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the engine. The CLI maps each variant onto an exit code.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Caller passed arguments that violate an operation's preconditions.
    #[error("usage error: {0}")]
    Usage(String),

    /// A body or curve parameter is out of its valid domain.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A closed-form result was requested outside the curvature regime where it holds.
    #[error("regime violation: {0}")]
    Regime(String),

    /// The sampler cannot make progress (e.g. the hit probability is vanishingly small).
    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    /// Experiment configuration could not be parsed or validated.
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn ensure_dim(expected: usize, got: usize, what: &str) -> Result<()> {
    if expected != got {
        return Err(Error::Usage(format!(
            "{what}: dimension mismatch (expected {expected}, got {got})"
        )));
    }
    Ok(())
}
