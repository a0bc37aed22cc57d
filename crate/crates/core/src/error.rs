use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("graph is disconnected")]
    Disconnected,

    #[error("base graph is not a tree: {0}")]
    NotATree(String),

    #[error("invalid bilevel graph: {0}")]
    InvalidBilevel(String),

    #[error("graph with {n} nodes exceeds the enumeration limit of {max}")]
    TooManyNodes { n: usize, max: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid onto decomposition: {0}")]
    InvalidDecomposition(String),

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite value at iteration {iter}")]
    NonFinite { iter: usize },

    #[error("protocol violation: agent {agent} in round {round}: {detail}")]
    Protocol {
        agent: usize,
        round: usize,
        detail: String,
    },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{0}")]
    Problem(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Errors caused by bad numerics rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonFinite { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
