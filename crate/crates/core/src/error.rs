use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid construction parameters (grids, specs, run configuration).
    #[error("configuration error: {0}")]
    Config(String),

    /// An argument outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A non-finite or out-of-range value produced while evaluating `what`.
    #[error("overflow in {what} at node {node}")]
    Overflow { what: &'static str, node: usize },

    /// Overflow surfaced from a Monte Carlo path, with its index in the side.
    #[error("overflow on path {path}: {source}")]
    PathOverflow {
        path: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("insufficient data: {0}")]
    Insufficient(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
