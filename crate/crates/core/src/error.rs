use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("graph has no edges")]
    EmptyGraph,

    #[error("self-loop on node {0} rejected")]
    SelfLoop(usize),

    #[error("unknown node token `{0}`")]
    UnknownNode(String),

    #[error("no candidate edges")]
    NoCandidates,

    /// Every violated instance invariant, not just the first.
    #[error("invalid instance: {}", .0.join("; "))]
    Invalid(Vec<String>),

    /// A size guard refused to run (combinatorial or memory bound).
    #[error("refused: {0}")]
    Guard(String),

    #[error("sampling failed: {0}")]
    Sampling(String),

    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn is_guard(&self) -> bool {
        matches!(self, Error::Guard(_))
    }
}
