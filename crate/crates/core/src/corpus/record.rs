use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{CanonicalKey, CategoryPath, CorpusError, LanguageTag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Qc,
    Qi,
}

impl FromStr for Task {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "qc" => Ok(Task::Qc),
            "qi" => Ok(Task::Qi),
            _ => Err(CorpusError::UnknownTask(s.to_string())),
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Qc => "qc",
            Task::Qi => "qi",
        })
    }
}

/// Binary relevance label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Label {
    Negative = 0,
    Positive = 1,
}

impl Label {
    pub fn as_u8(self) -> u8 {
        self as u8
    }

    pub fn is_positive(self) -> bool {
        self == Label::Positive
    }
}

impl TryFrom<u8> for Label {
    type Error = CorpusError;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        match v {
            0 => Ok(Label::Negative),
            1 => Ok(Label::Positive),
            _ => Err(CorpusError::LabelOutOfRange(v.to_string())),
        }
    }
}

impl FromStr for Label {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "0" => Ok(Label::Negative),
            "1" => Ok(Label::Positive),
            _ => Err(CorpusError::LabelOutOfRange(s.to_string())),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

/// Provenance of a record.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(rename_all = "kebab-case")]
pub enum Origin {
    #[default]
    Original,
    Translated,
    GeneratedNegative,
}

impl Origin {
    pub fn as_str(self) -> &'static str {
        match self {
            Origin::Original => "original",
            Origin::Translated => "translated",
            Origin::GeneratedNegative => "generated-negative",
        }
    }
}

impl FromStr for Origin {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "original" => Ok(Origin::Original),
            "translated" => Ok(Origin::Translated),
            "generated-negative" => Ok(Origin::GeneratedNegative),
            _ => Err(CorpusError::UnknownOrigin(s.to_string())),
        }
    }
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn check_text(field: &'static str, text: &str) -> Result<(), CorpusError> {
    if text.trim().is_empty() {
        return Err(CorpusError::EmptyField(field));
    }
    if text.contains(['\t', '\n']) {
        return Err(CorpusError::ReservedCharacter(field));
    }
    Ok(())
}

/// A query paired with a category path.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QCRecord {
    pub query: String,
    pub language: LanguageTag,
    pub path: CategoryPath,
    pub label: Label,
    pub origin: Origin,
}

impl QCRecord {
    pub fn new(
        query: impl Into<String>,
        language: LanguageTag,
        path: CategoryPath,
        label: Label,
    ) -> Result<Self, CorpusError> {
        let query = query.into();
        check_text("query", &query)?;
        Ok(QCRecord {
            query,
            language,
            path,
            label,
            origin: Origin::Original,
        })
    }

    pub fn with_origin(mut self, origin: Origin) -> Self {
        self.origin = origin;
        self
    }
}

/// A query paired with a product listing.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QIRecord {
    pub query: String,
    pub language: LanguageTag,
    pub item_id: String,
    pub item_title: String,
    pub label: Label,
    pub origin: Origin,
}

impl QIRecord {
    pub fn new(
        query: impl Into<String>,
        language: LanguageTag,
        item_id: impl Into<String>,
        item_title: impl Into<String>,
        label: Label,
    ) -> Result<Self, CorpusError> {
        let (query, item_id, item_title) = (query.into(), item_id.into(), item_title.into());
        check_text("query", &query)?;
        check_text("item_id", &item_id)?;
        check_text("item_title", &item_title)?;
        Ok(QIRecord {
            query,
            language,
            item_id,
            item_title,
            label,
            origin: Origin::Original,
        })
    }

    pub fn with_origin(mut self, origin: Origin) -> Self {
        self.origin = origin;
        self
    }
}

/// Behaviour shared by both record kinds.
pub trait Record: Clone + Send + Sync {
    const TASK: Task;

    fn query(&self) -> &str;
    fn language(&self) -> LanguageTag;
    fn label(&self) -> Label;
    fn origin(&self) -> Origin;
    fn canonical_key(&self) -> CanonicalKey;

    /// Copy with a new query and language, keeping the target and label.
    fn translated(&self, query: String, language: LanguageTag) -> Self;

    /// Whether the target side (path or item) is byte-identical.
    fn same_target(&self, other: &Self) -> bool;
}

impl Record for QCRecord {
    const TASK: Task = Task::Qc;

    fn query(&self) -> &str {
        &self.query
    }
    fn language(&self) -> LanguageTag {
        self.language
    }
    fn label(&self) -> Label {
        self.label
    }
    fn origin(&self) -> Origin {
        self.origin
    }
    fn canonical_key(&self) -> CanonicalKey {
        CanonicalKey::new(&self.query, &self.path.render())
    }
    fn translated(&self, query: String, language: LanguageTag) -> Self {
        QCRecord {
            query,
            language,
            path: self.path.clone(),
            label: self.label,
            origin: Origin::Translated,
        }
    }
    fn same_target(&self, other: &Self) -> bool {
        self.path == other.path
    }
}

impl Record for QIRecord {
    const TASK: Task = Task::Qi;

    fn query(&self) -> &str {
        &self.query
    }
    fn language(&self) -> LanguageTag {
        self.language
    }
    fn label(&self) -> Label {
        self.label
    }
    fn origin(&self) -> Origin {
        self.origin
    }
    fn canonical_key(&self) -> CanonicalKey {
        CanonicalKey::with_opaque_target(&self.query, &self.item_id)
    }
    fn translated(&self, query: String, language: LanguageTag) -> Self {
        QIRecord {
            query,
            language,
            item_id: self.item_id.clone(),
            item_title: self.item_title.clone(),
            label: self.label,
            origin: Origin::Translated,
        }
    }
    fn same_target(&self, other: &Self) -> bool {
        self.item_id == other.item_id && self.item_title == other.item_title
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::PathSeparator;

    fn path(s: &str) -> CategoryPath {
        CategoryPath::parse(s, PathSeparator::Angle).unwrap()
    }

    #[test]
    fn empty_query_rejected() {
        assert!(QCRecord::new("  ", LanguageTag::En, path("A"), Label::Positive).is_err());
        assert!(QIRecord::new("q", LanguageTag::En, "", "t", Label::Positive).is_err());
        assert!(QIRecord::new("q", LanguageTag::En, "1", " ", Label::Positive).is_err());
    }

    #[test]
    fn keys_depend_on_target() {
        let a = QCRecord::new("shoes", LanguageTag::En, path("A > B"), Label::Positive).unwrap();
        let b = QCRecord::new("shoes", LanguageTag::En, path("A > C"), Label::Positive).unwrap();
        assert_ne!(a.canonical_key(), b.canonical_key());
        assert_eq!(a.canonical_key(), a.clone().canonical_key());
    }

    #[test]
    fn origin_defaults_to_original() {
        let r = QCRecord::new("x", LanguageTag::En, path("A"), Label::Negative).unwrap();
        assert_eq!(r.origin, Origin::Original);
        assert_eq!(
            "generated-negative".parse::<Origin>().unwrap(),
            Origin::GeneratedNegative
        );
    }
}
