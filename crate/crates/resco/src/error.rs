//! Crate error type.

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed header in {path}: {reason}")]
    MalformedHeader { path: PathBuf, reason: String },

    #[error("truncated payload in {path}: record {record} incomplete")]
    TruncatedPayload { path: PathBuf, record: usize },

    #[error("trailing bytes in {path}: {extra} bytes after the declared {count} records")]
    TrailingBytes {
        path: PathBuf,
        extra: usize,
        count: usize,
    },

    #[error("duplicate key {key:?} in {path} at record {record}")]
    DuplicateKey {
        path: PathBuf,
        key: String,
        record: usize,
    },

    #[error("ragged line {line} in {path}: expected {expected} components, found {found}")]
    RaggedLine {
        path: PathBuf,
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("non-numeric component {field:?} on line {line} in {path}")]
    NonNumeric {
        path: PathBuf,
        line: usize,
        field: String,
    },

    #[error("no sentences after segmentation")]
    EmptyDocument,

    #[error("document {doc_id:?} has a single sentence; features over neighbours are undefined")]
    DegenerateDocument { doc_id: String },

    #[error("clustering requires at least one point")]
    EmptyPointSet,

    #[error("k = {k} exceeds the {distinct} distinct points available")]
    KExceedsDistinct { k: usize, distinct: usize },

    #[error("vector length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("need at least {min} values, got {got}")]
    TooFewValues { min: usize, got: usize },

    #[error("labels contain no relevant item")]
    AllZeroLabels,

    #[error("rho = {rho} out of range 1..={n}")]
    RhoOutOfRange { rho: usize, n: usize },

    #[error("the ndcg metric requires rho")]
    MissingRho,

    #[error("refsim length {refsim} does not match document {doc_id:?} with {n} sentences")]
    RefsimLengthMismatch {
        doc_id: String,
        refsim: usize,
        n: usize,
    },

    #[error("no matched (hoax, refutation) pairs under {root}")]
    NoMatchedPairs { root: PathBuf },

    #[error("invalid JSON in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
