use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors reported by the alignment library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A line of an input file did not parse. `line` is 1-based.
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error(
        "embedding file {path}: expected {expected} bytes ({rows} rows x {dim} dims x 4), found {actual}"
    )]
    EmbeddingSize {
        path: PathBuf,
        expected: u64,
        actual: u64,
        rows: usize,
        dim: usize,
    },

    #[error("non-finite embedding value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("vector dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },

    #[error("cosine similarity is undefined for a zero vector")]
    ZeroVector,

    #[error("nearest-neighbour search over an empty index matrix")]
    EmptyIndex,

    #[error("lexicon direction mismatch: {left_src}->{left_tgt} vs {right_src}->{right_tgt}")]
    DirectionMismatch {
        left_src: String,
        left_tgt: String,
        right_src: String,
        right_tgt: String,
    },

    #[error("probability masses disagree: source side sums to {src}, target side to {tgt}")]
    MassMismatch { src: f64, tgt: f64 },

    #[error("document {doc_id} has no tokens; sentence-length weighting is undefined")]
    NoTokens { doc_id: String },

    #[error("IDF statistics are required for the {scheme} weighting scheme")]
    MissingIdf { scheme: String },

    #[error("alignment target side is empty")]
    EmptyTargetSide,

    #[error("gold alignment is empty")]
    EmptyGold,

    #[error("margin denominator is zero for pair ({src}, {tgt})")]
    ZeroMarginDenominator { src: usize, tgt: usize },

    #[error("{0}")]
    InvalidInput(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }
}
