use std::io;

use thiserror::Error;

/// Errors raised anywhere along the sentence → circuit → label pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("no planar reduction of `{types}` to `{target}`")]
    NoReduction { types: String, target: String },

    #[error("{count} distinct reductions of `{types}` to `{target}`")]
    AmbiguousReduction {
        types: String,
        target: String,
        count: usize,
    },

    #[error("unknown word `{0}`")]
    UnknownWord(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("grammar yields only {available} distinct `{topic}` sentences, {requested} requested")]
    InsufficientLanguage {
        topic: String,
        available: usize,
        requested: usize,
    },

    #[error("cannot draw a balanced split: {0}")]
    ImbalancedRequest(String),

    #[error("no ansatz rule for {0}")]
    UnsupportedDiagram(String),

    #[error("no shot survived post-selection")]
    EmptyPostselection,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// Whether this is a numerical failure (as opposed to bad input data).
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::EmptyPostselection)
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
