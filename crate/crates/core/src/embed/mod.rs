//! Item-title embeddings and QI negative mining.

mod format;
mod kernel;
mod mine;
mod store;

pub use format::{Embv1Entry, Embv1File, MAGIC};
pub use kernel::dot;
pub use mine::{
    batch_mine, batch_mine_with_titles, cosine, item_titles, mine_easy, mine_hard, HardPick, Mined,
    MiningConfig, MiningDiagnostic, MiningError, MiningMode, MiningOutput, DEFAULT_HARD_THRESHOLD,
};
pub use store::{load_embeddings, EmbeddingStore, LoadDiagnostic, Partition, NORM_TOLERANCE};

#[derive(Debug, thiserror::Error)]
pub enum EmbedError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("not an EMBV1 file (bad magic)")]
    BadMagic,
    #[error("truncated payload at byte {offset} while reading {what}")]
    Truncated { offset: usize, what: &'static str },
    #[error("{0} unexpected bytes after the last record")]
    TrailingBytes(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("dimension must be positive")]
    ZeroDimension,
    #[error("duplicate item_id {item_id:?} in language {language}")]
    DuplicateId { language: String, item_id: String },
    #[error("unknown language code {0:?}")]
    UnknownLanguage(String),
    #[error("record {0} has an empty item_id")]
    EmptyItemId(usize),
    #[error("invalid UTF-8 in {what} at byte {offset}")]
    InvalidUtf8 { offset: usize, what: &'static str },
    #[error("{0} too long for the EMBV1 format")]
    TooLarge(&'static str),
}
