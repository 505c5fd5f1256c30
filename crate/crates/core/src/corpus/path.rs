use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::CorpusError;

/// Level separator used on disk and in canonical renderings.
pub const PATH_SEPARATOR: &str = " > ";

/// Separator accepted from inputs that render paths as comma lists.
pub const COMMA_SEPARATOR: &str = ", ";

/// Which separator an input file uses between category levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PathSeparator {
    #[default]
    Angle,
    Comma,
}

impl PathSeparator {
    pub fn as_str(self) -> &'static str {
        match self {
            PathSeparator::Angle => PATH_SEPARATOR,
            PathSeparator::Comma => COMMA_SEPARATOR,
        }
    }
}

/// Ordered category levels, root (L0) first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CategoryPath {
    levels: Vec<String>,
}

impl CategoryPath {
    /// Builds a path from level names. Levels are trimmed; empty levels and
    /// levels containing the separator or control characters are rejected.
    pub fn new<I, S>(levels: I) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let levels = levels
            .into_iter()
            .map(|s| {
                let level = s.as_ref().trim();
                if level.is_empty() {
                    return Err(CorpusError::InvalidPath("empty level".into()));
                }
                if level.contains(PATH_SEPARATOR) || level.contains(['\t', '\n', '\r']) {
                    return Err(CorpusError::InvalidPath(format!(
                        "level {level:?} contains a reserved character sequence"
                    )));
                }
                Ok(level.to_string())
            })
            .collect::<Result<Vec<_>, _>>()?;
        if levels.is_empty() {
            return Err(CorpusError::InvalidPath("path has no levels".into()));
        }
        Ok(CategoryPath { levels })
    }

    pub fn parse(text: &str, separator: PathSeparator) -> Result<Self, CorpusError> {
        CategoryPath::new(text.split(separator.as_str()))
    }

    pub fn levels(&self) -> &[String] {
        &self.levels
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, index: usize) -> Option<&str> {
        self.levels.get(index).map(String::as_str)
    }

    pub fn leaf(&self) -> &str {
        self.levels.last().expect("path has at least one level")
    }

    /// The first `depth` levels, or `None` when the path is shallower.
    pub fn prefix(&self, depth: usize) -> Option<CategoryPath> {
        (depth >= 1 && depth <= self.levels.len()).then(|| CategoryPath {
            levels: self.levels[..depth].to_vec(),
        })
    }

    pub fn starts_with(&self, other: &CategoryPath) -> bool {
        self.levels.starts_with(&other.levels)
    }

    pub fn render(&self) -> String {
        self.levels.join(PATH_SEPARATOR)
    }

    pub(crate) fn from_levels_unchecked(levels: Vec<String>) -> Self {
        debug_assert!(!levels.is_empty());
        CategoryPath { levels }
    }
}

impl fmt::Display for CategoryPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl Serialize for CategoryPath {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.render())
    }
}

impl<'de> Deserialize<'de> for CategoryPath {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        CategoryPath::parse(&s, PathSeparator::Angle).map_err(serde::de::Error::custom)
    }
}
