//! Cleaning rules (conflicting labels, duplicates, purely numeric queries)
//! and per-language label statistics.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::ops::Add;
use std::path::Path;

use serde::{Deserialize, Serialize};
use unicode_properties::{GeneralCategory, GeneralCategoryGroup, UnicodeGeneralCategory};

use crate::corpus::{normalize, CanonicalKey, Label, LanguageTag, Record};

#[derive(Debug, thiserror::Error)]
pub enum CleanseError {
    #[error("cannot read allowlist {path}: {source}")]
    Allowlist {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Counters for one run of the cleaning pipeline.
///
/// `kept + conflicts_removed + duplicates_removed + numeric_removed` equals
/// the input count. `allowlisted_kept` is a subset of `kept`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanseReport {
    pub allowlisted_kept: usize,
    pub conflicts_removed: usize,
    pub duplicates_removed: usize,
    pub input: usize,
    pub kept: usize,
    pub numeric_removed: usize,
}

impl CleanseReport {
    pub fn reconciles(&self) -> bool {
        self.kept + self.conflicts_removed + self.duplicates_removed + self.numeric_removed
            == self.input
    }
}

/// A key whose records carried both labels; all of them were dropped.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConflictGroup {
    pub key: CanonicalKey,
    /// Positions of the removed records in the input.
    pub indices: Vec<usize>,
}

/// Drops every record whose canonical key occurs with both labels.
pub fn remove_conflicts<R: Record>(records: Vec<R>) -> (Vec<R>, Vec<ConflictGroup>) {
    let keys: Vec<CanonicalKey> = records.iter().map(Record::canonical_key).collect();
    let mut seen: HashMap<&CanonicalKey, [bool; 2]> = HashMap::with_capacity(keys.len());
    for (key, r) in keys.iter().zip(&records) {
        seen.entry(key).or_default()[r.label().as_u8() as usize] = true;
    }

    let mut groups: Vec<ConflictGroup> = Vec::new();
    let mut group_of: HashMap<&CanonicalKey, usize> = HashMap::new();
    let mut kept = Vec::with_capacity(records.len());
    for (i, (key, r)) in keys.iter().zip(records).enumerate() {
        if seen[key] == [true, true] {
            let g = *group_of.entry(key).or_insert_with(|| {
                groups.push(ConflictGroup {
                    key: key.clone(),
                    indices: Vec::new(),
                });
                groups.len() - 1
            });
            groups[g].indices.push(i);
        } else {
            kept.push(r);
        }
    }
    (kept, groups)
}

/// Keeps the first record of each `(canonical key, label)` pair.
pub fn dedup<R: Record>(records: Vec<R>) -> Vec<R> {
    let mut seen: HashSet<(CanonicalKey, Label)> = HashSet::with_capacity(records.len());
    records
        .into_iter()
        .filter(|r| seen.insert((r.canonical_key(), r.label())))
        .collect()
}

/// How strictly "purely numerical" is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NumericMode {
    /// Whitespace and punctuation are ignored ("12-34" is numeric).
    #[default]
    IgnorePunctuation,
    /// Only decimal digits, after trimming ("12-34" is not numeric).
    DigitsOnly,
}

pub fn is_purely_numeric(query: &str, mode: NumericMode) -> bool {
    let mut any = false;
    match mode {
        NumericMode::IgnorePunctuation => {
            for c in query.chars() {
                if c.is_whitespace()
                    || c.general_category_group() == GeneralCategoryGroup::Punctuation
                {
                    continue;
                }
                if c.general_category() != GeneralCategory::DecimalNumber {
                    return false;
                }
                any = true;
            }
        }
        NumericMode::DigitsOnly => {
            for c in query.trim().chars() {
                if c.general_category() != GeneralCategory::DecimalNumber {
                    return false;
                }
                any = true;
            }
        }
    }
    any
}

/// Normalized queries exempt from numeric filtering.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Allowlist(HashSet<String>);

impl Allowlist {
    pub fn from_lines(text: &str) -> Self {
        Allowlist(
            text.lines()
                .map(normalize)
                .filter(|q| !q.is_empty())
                .collect(),
        )
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CleanseError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| CleanseError::Allowlist {
            path: path.display().to_string(),
            source,
        })?;
        Ok(Allowlist::from_lines(&text))
    }

    pub fn contains(&self, query: &str) -> bool {
        self.0.contains(&normalize(query))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<S: AsRef<str>> FromIterator<S> for Allowlist {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Allowlist(iter.into_iter().map(|s| normalize(s.as_ref())).collect())
    }
}

#[derive(Debug, Clone)]
pub struct NumericOutcome<R> {
    pub kept: Vec<R>,
    pub removed: Vec<R>,
    pub allowlisted_kept: usize,
}

pub fn filter_numeric<R: Record>(
    records: Vec<R>,
    allowlist: &Allowlist,
    mode: NumericMode,
) -> NumericOutcome<R> {
    let mut outcome = NumericOutcome {
        kept: Vec::with_capacity(records.len()),
        removed: Vec::new(),
        allowlisted_kept: 0,
    };
    for r in records {
        if !is_purely_numeric(r.query(), mode) {
            outcome.kept.push(r);
        } else if allowlist.contains(r.query()) {
            outcome.allowlisted_kept += 1;
            outcome.kept.push(r);
        } else {
            outcome.removed.push(r);
        }
    }
    outcome
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanseOptions {
    pub remove_conflicts: bool,
    pub dedup: bool,
    pub filter_numeric: bool,
    pub numeric_mode: NumericMode,
}

impl Default for CleanseOptions {
    fn default() -> Self {
        CleanseOptions {
            remove_conflicts: true,
            dedup: true,
            filter_numeric: true,
            numeric_mode: NumericMode::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CleanseOutput<R> {
    pub records: Vec<R>,
    pub report: CleanseReport,
    pub conflict_groups: Vec<ConflictGroup>,
}

/// Runs conflict removal, then deduplication, then numeric filtering.
pub fn cleanse<R: Record>(
    records: Vec<R>,
    options: &CleanseOptions,
    allowlist: &Allowlist,
) -> CleanseOutput<R> {
    let mut report = CleanseReport {
        input: records.len(),
        ..CleanseReport::default()
    };
    let mut records = records;
    let mut conflict_groups = Vec::new();

    if options.remove_conflicts {
        let before = records.len();
        let (kept, groups) = remove_conflicts(records);
        report.conflicts_removed = before - kept.len();
        records = kept;
        conflict_groups = groups;
    }
    if options.dedup {
        let before = records.len();
        records = dedup(records);
        report.duplicates_removed = before - records.len();
    }
    if options.filter_numeric {
        let outcome = filter_numeric(records, allowlist, options.numeric_mode);
        report.numeric_removed = outcome.removed.len();
        report.allowlisted_kept = outcome.allowlisted_kept;
        records = outcome.kept;
    }
    report.kept = records.len();
    debug_assert!(report.reconciles());
    CleanseOutput {
        records,
        report,
        conflict_groups,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelCounts {
    pub negatives: u64,
    pub positives: u64,
    pub total: u64,
}

impl LabelCounts {
    fn count(&mut self, label: Label) {
        match label {
            Label::Positive => self.positives += 1,
            Label::Negative => self.negatives += 1,
        }
        self.total += 1;
    }
}

impl Add for LabelCounts {
    type Output = LabelCounts;

    fn add(self, rhs: LabelCounts) -> LabelCounts {
        LabelCounts {
            negatives: self.negatives + rhs.negatives,
            positives: self.positives + rhs.positives,
            total: self.total + rhs.total,
        }
    }
}

/// Positive/negative counts per language plus grand totals.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelStats {
    pub languages: BTreeMap<LanguageTag, LabelCounts>,
    pub totals: LabelCounts,
}

impl LabelStats {
    pub fn is_consistent(&self) -> bool {
        let summed = self
            .languages
            .values()
            .fold(LabelCounts::default(), |acc, c| acc + *c);
        summed == self.totals
            && self
                .languages
                .values()
                .all(|c| c.positives + c.negatives == c.total)
    }

    /// `language,positives,negatives,total` rows, languages in code order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("language,positives,negatives,total\n");
        for (lang, c) in &self.languages {
            out.push_str(&format!(
                "{lang},{},{},{}\n",
                c.positives, c.negatives, c.total
            ));
        }
        out
    }
}

impl Add for LabelStats {
    type Output = LabelStats;

    fn add(mut self, rhs: LabelStats) -> LabelStats {
        for (lang, c) in rhs.languages {
            let entry = self.languages.entry(lang).or_default();
            *entry = *entry + c;
        }
        self.totals = self.totals + rhs.totals;
        self
    }
}

pub fn language_stats<R: Record>(records: &[R]) -> LabelStats {
    let mut stats = LabelStats::default();
    for r in records {
        stats
            .languages
            .entry(r.language())
            .or_default()
            .count(r.label());
        stats.totals.count(r.label());
    }
    stats
}
