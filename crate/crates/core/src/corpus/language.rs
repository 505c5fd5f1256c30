use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::CorpusError;

/// ISO-639-1 code of a supported query language.
///
/// Variants are declared in code order, so the derived `Ord` sorts
/// alphabetically by code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LanguageTag {
    Ar,
    De,
    En,
    Es,
    Fr,
    Id,
    It,
    Ja,
    Ko,
    Pl,
    Pt,
    Th,
    Vi,
}

impl LanguageTag {
    pub const ALL: [LanguageTag; 13] = [
        LanguageTag::Ar,
        LanguageTag::De,
        LanguageTag::En,
        LanguageTag::Es,
        LanguageTag::Fr,
        LanguageTag::Id,
        LanguageTag::It,
        LanguageTag::Ja,
        LanguageTag::Ko,
        LanguageTag::Pl,
        LanguageTag::Pt,
        LanguageTag::Th,
        LanguageTag::Vi,
    ];

    /// Languages added by query-category augmentation.
    pub const QC_AUGMENT_TARGETS: [LanguageTag; 4] = [
        LanguageTag::De,
        LanguageTag::Ar,
        LanguageTag::It,
        LanguageTag::Pl,
    ];

    /// Languages added by query-item augmentation.
    pub const QI_AUGMENT_TARGETS: [LanguageTag; 6] = [
        LanguageTag::De,
        LanguageTag::Ar,
        LanguageTag::It,
        LanguageTag::Pl,
        LanguageTag::Vi,
        LanguageTag::Id,
    ];

    pub fn code(self) -> &'static str {
        match self {
            LanguageTag::Ar => "ar",
            LanguageTag::De => "de",
            LanguageTag::En => "en",
            LanguageTag::Es => "es",
            LanguageTag::Fr => "fr",
            LanguageTag::Id => "id",
            LanguageTag::It => "it",
            LanguageTag::Ja => "ja",
            LanguageTag::Ko => "ko",
            LanguageTag::Pl => "pl",
            LanguageTag::Pt => "pt",
            LanguageTag::Th => "th",
            LanguageTag::Vi => "vi",
        }
    }

    pub fn parse_list(list: &str) -> Result<Vec<LanguageTag>, CorpusError> {
        list.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .collect()
    }
}

impl FromStr for LanguageTag {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        LanguageTag::ALL
            .iter()
            .copied()
            .find(|l| l.code() == s)
            .ok_or_else(|| CorpusError::UnknownLanguage(s.to_string()))
    }
}

impl fmt::Display for LanguageTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl Serialize for LanguageTag {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.code())
    }
}

impl<'de> Deserialize<'de> for LanguageTag {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
