//! Record types, normalization and TSV I/O for QC and QI corpora.

mod language;
mod normalize;
mod path;
mod record;
mod tsv;

pub use language::LanguageTag;
pub use normalize::{normalize, simple_fold, CanonicalKey};
pub use path::{CategoryPath, PathSeparator, COMMA_SEPARATOR, PATH_SEPARATOR};
pub use record::{Label, Origin, QCRecord, QIRecord, Record, Task};
pub use tsv::{
    parse_record_file, parse_records, to_tsv_string, write_record_file, write_records, Diagnostic,
    ParseOptions, Parsed, TsvRecord,
};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0} is not valid UTF-8")]
    NotUtf8(String),
    #[error("missing header row")]
    MissingHeader,
    #[error("missing header column {0:?}")]
    MissingColumn(String),
    #[error("unknown header column {0:?}")]
    UnknownColumn(String),
    #[error("duplicate header column {0:?}")]
    DuplicateColumn(String),
    #[error("unknown language code {0:?}")]
    UnknownLanguage(String),
    #[error("unknown task {0:?} (expected qc or qi)")]
    UnknownTask(String),
    #[error("unknown origin {0:?}")]
    UnknownOrigin(String),
    #[error("label out of range: {0:?}")]
    LabelOutOfRange(String),
    #[error("invalid category path: {0}")]
    InvalidPath(String),
    #[error("field {0} is empty")]
    EmptyField(&'static str),
    #[error("field {0} contains a tab or newline")]
    ReservedCharacter(&'static str),
}
