use thiserror::Error;

/// Failure categories shared by every numeric routine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of the function.
    #[error("domain error: {0}")]
    Domain(String),
    /// Grid or parameter configuration cannot support the requested accuracy.
    #[error("configuration error: {0}")]
    Config(String),
    /// An iteration failed to converge or produced an invalid value.
    #[error("numeric failure: {0}")]
    Numeric(String),
    /// The chosen evaluation method does not apply to this input.
    #[error("method error: {0}")]
    Method(String),
    /// A modelling constraint is violated (for example a power cap below the noise power).
    #[error("constraint violated: {0}")]
    Constraint(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

pub(crate) fn numeric(msg: impl Into<String>) -> Error {
    Error::Numeric(msg.into())
}
