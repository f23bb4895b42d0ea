use thiserror::Error;

/// Errors raised by the discrimination-power toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Shapes or lengths that do not fit together.
    #[error("structural error: {0}")]
    Structural(String),

    /// A value outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configured size cap would be exceeded.
    #[error("resource cap `{cap}` exceeded: {detail}")]
    Resource { cap: &'static str, detail: String },

    /// The input is valid but the requested routine does not handle it.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A commuting-qubit formula was called with p = q.
    #[error("degenerate detector: p = q = {0}")]
    Degenerate(f64),

    /// Malformed input file.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn structural(msg: impl Into<String>) -> Error {
    Error::Structural(msg.into())
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
