//! QI negative mining against the positive item's embedding.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::{self, Selector};
use super::store::{EmbeddingStore, Partition};
use super::EmbedError;
use crate::corpus::{CanonicalKey, Label, LanguageTag, Origin, QIRecord, Record};
use crate::{seed, Scalar};

/// Threshold below which a candidate counts as a hard negative.
pub const DEFAULT_HARD_THRESHOLD: f64 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MiningMode {
    Easy,
    Hard,
}

impl FromStr for MiningMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "easy" => Ok(MiningMode::Easy),
            "hard" => Ok(MiningMode::Hard),
            _ => Err(format!("unknown mining mode {s:?} (expected easy or hard)")),
        }
    }
}

impl fmt::Display for MiningMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MiningMode::Easy => "easy",
            MiningMode::Hard => "hard",
        })
    }
}

/// Which below-threshold candidate becomes the hard negative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HardPick {
    /// Highest similarity strictly below the threshold.
    #[default]
    Closest,
    /// Uniformly random among candidates below the threshold.
    UniformBelow,
}

impl FromStr for HardPick {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "closest" => Ok(HardPick::Closest),
            "uniform-below" => Ok(HardPick::UniformBelow),
            _ => Err(format!(
                "unknown hard pick {s:?} (expected closest or uniform-below)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiningConfig {
    pub mode: MiningMode,
    pub hard_threshold: f64,
    pub hard_pick: HardPick,
    pub seed: u64,
}

impl MiningConfig {
    pub fn new(mode: MiningMode) -> Self {
        MiningConfig {
            mode,
            hard_threshold: DEFAULT_HARD_THRESHOLD,
            hard_pick: HardPick::Closest,
            seed: seed::DEFAULT_SEED,
        }
    }

    pub fn validate(&self) -> Result<(), MiningError> {
        if self.hard_threshold > 0.0 && self.hard_threshold <= 1.0 {
            Ok(())
        } else {
            Err(MiningError::InvalidThreshold(self.hard_threshold))
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MiningError {
    #[error("item {item_id:?} has no {language} embedding")]
    UnknownItem {
        item_id: String,
        language: LanguageTag,
    },
    #[error("no other {0} items to choose from")]
    NoCandidates(LanguageTag),
    #[error("no candidate below similarity threshold {0}")]
    NoCandidatesBelowThreshold(f64),
    #[error("hard threshold must satisfy 0 < tau <= 1, got {0}")]
    InvalidThreshold(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mined {
    pub item_id: String,
    pub similarity: f64,
}

/// Cosine similarity of two unit vectors.
pub fn cosine<T: Scalar>(u: &[T], v: &[T]) -> Result<f64, EmbedError> {
    if u.len() != v.len() {
        return Err(EmbedError::DimensionMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    Ok(kernel::dot(u, v))
}

#[inline]
fn better_tie(ids: &[String], candidate: usize, incumbent: usize) -> bool {
    ids[candidate] < ids[incumbent]
}

struct Lowest {
    exclude: usize,
    best: Option<(usize, f64)>,
}

impl Selector for Lowest {
    #[inline]
    fn offer(&mut self, candidate: usize, similarity: f64, ids: &[String]) {
        if candidate == self.exclude {
            return;
        }
        match self.best {
            Some((b, s))
                if similarity > s || (similarity == s && !better_tie(ids, candidate, b)) => {}
            _ => self.best = Some((candidate, similarity)),
        }
    }
}

struct ClosestBelow {
    exclude: usize,
    threshold: f64,
    best: Option<(usize, f64)>,
}

impl Selector for ClosestBelow {
    #[inline]
    fn offer(&mut self, candidate: usize, similarity: f64, ids: &[String]) {
        if candidate == self.exclude || similarity >= self.threshold {
            return;
        }
        match self.best {
            Some((b, s))
                if similarity < s || (similarity == s && !better_tie(ids, candidate, b)) => {}
            _ => self.best = Some((candidate, similarity)),
        }
    }
}

struct AllBelow {
    exclude: usize,
    threshold: f64,
    hits: Vec<(usize, f64)>,
}

impl Selector for AllBelow {
    #[inline]
    fn offer(&mut self, candidate: usize, similarity: f64, _ids: &[String]) {
        if candidate != self.exclude && similarity < self.threshold {
            self.hits.push((candidate, similarity));
        }
    }
}

fn locate<'s, T: Scalar>(
    store: &'s EmbeddingStore<T>,
    item_id: &str,
    language: LanguageTag,
) -> Result<(&'s Partition<T>, usize), MiningError> {
    let unknown = || MiningError::UnknownItem {
        item_id: item_id.to_string(),
        language,
    };
    let partition = store.partition(language).ok_or_else(unknown)?;
    let row = partition.position(item_id).ok_or_else(unknown)?;
    Ok((partition, row))
}

/// The same-language item least similar to the positive item.
///
/// Ties go to the lexicographically smallest item id.
pub fn mine_easy<T: Scalar>(
    positive_item_id: &str,
    language: LanguageTag,
    store: &EmbeddingStore<T>,
) -> Result<Mined, MiningError> {
    let (partition, row) = locate(store, positive_item_id, language)?;
    let mut sel = [Lowest {
        exclude: row,
        best: None,
    }];
    kernel::scan(partition, store.dimension(), &[row], &mut sel);
    let (i, s) = sel[0].best.ok_or(MiningError::NoCandidates(language))?;
    Ok(Mined {
        item_id: partition.ids()[i].clone(),
        similarity: s,
    })
}

/// The most similar same-language item whose similarity is strictly below
/// `threshold`.
pub fn mine_hard<T: Scalar>(
    positive_item_id: &str,
    language: LanguageTag,
    store: &EmbeddingStore<T>,
    threshold: f64,
) -> Result<Mined, MiningError> {
    let (partition, row) = locate(store, positive_item_id, language)?;
    if partition.len() < 2 {
        return Err(MiningError::NoCandidates(language));
    }
    let mut sel = [ClosestBelow {
        exclude: row,
        threshold,
        best: None,
    }];
    kernel::scan(partition, store.dimension(), &[row], &mut sel);
    let (i, s) = sel[0]
        .best
        .ok_or(MiningError::NoCandidatesBelowThreshold(threshold))?;
    Ok(Mined {
        item_id: partition.ids()[i].clone(),
        similarity: s,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiningDiagnostic {
    /// Position of the source record in the input.
    pub index: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MiningOutput {
    /// Mined negatives with the similarity of the chosen item, in source order.
    pub negatives: Vec<(QIRecord, f64)>,
    pub diagnostics: Vec<MiningDiagnostic>,
}

/// Queries handed to one worker at a time.
const WORK_CHUNK: usize = 64;

/// Mines one negative per positive record in `records`.
///
/// Item titles for mined ids are looked up in `titles`; the positive set used
/// for the collision guard is every positive `(query, item_id)` in `records`.
pub fn batch_mine_with_titles<T: Scalar>(
    records: &[QIRecord],
    titles: &HashMap<String, String>,
    store: &EmbeddingStore<T>,
    config: &MiningConfig,
) -> Result<MiningOutput, MiningError> {
    config.validate()?;
    let positives: HashSet<CanonicalKey> = records
        .iter()
        .filter(|r| r.label.is_positive())
        .map(Record::canonical_key)
        .collect();

    let mut diagnostics: Vec<MiningDiagnostic> = Vec::new();
    let mut by_language: BTreeMap<LanguageTag, Vec<(usize, usize)>> = BTreeMap::new();
    for (index, r) in records.iter().enumerate() {
        if r.label != Label::Positive {
            diagnostics.push(MiningDiagnostic {
                index,
                reason: "record is not a positive".into(),
            });
            continue;
        }
        match locate(store, &r.item_id, r.language) {
            Ok((_, row)) => by_language
                .entry(r.language)
                .or_default()
                .push((index, row)),
            Err(e) => diagnostics.push(MiningDiagnostic {
                index,
                reason: e.to_string(),
            }),
        }
    }

    let mut picks: Vec<Pick> = Vec::new();
    for (language, jobs) in &by_language {
        let partition = store.partition(*language).expect("located above");
        let chunk_results: Vec<Vec<Pick>> = jobs
            .par_chunks(WORK_CHUNK)
            .map(|chunk| mine_chunk(partition, store.dimension(), *language, chunk, config))
            .collect();
        picks.extend(chunk_results.into_iter().flatten());
    }

    let mut negatives = Vec::with_capacity(picks.len());
    for (index, pick) in picks {
        let source = &records[index];
        let partition = store.partition(source.language).expect("located above");
        let (row, similarity) = match pick {
            Ok(p) => p,
            Err(e) => {
                diagnostics.push(MiningDiagnostic {
                    index,
                    reason: e.to_string(),
                });
                continue;
            }
        };
        let item_id = &partition.ids()[row];
        let Some(title) = titles.get(item_id) else {
            diagnostics.push(MiningDiagnostic {
                index,
                reason: format!("no title known for mined item {item_id:?}"),
            });
            continue;
        };
        let negative = QIRecord {
            query: source.query.clone(),
            language: source.language,
            item_id: item_id.clone(),
            item_title: title.clone(),
            label: Label::Negative,
            origin: Origin::GeneratedNegative,
        };
        if positives.contains(&negative.canonical_key()) {
            diagnostics.push(MiningDiagnostic {
                index,
                reason: format!("mined item {item_id:?} is already a positive for this query"),
            });
            continue;
        }
        negatives.push((index, negative, similarity));
    }
    negatives.sort_by_key(|(i, _, _)| *i);
    diagnostics.sort_by_key(|d| d.index);
    Ok(MiningOutput {
        negatives: negatives.into_iter().map(|(_, r, s)| (r, s)).collect(),
        diagnostics,
    })
}

/// [`batch_mine_with_titles`] with titles taken from `records` themselves.
pub fn batch_mine<T: Scalar>(
    records: &[QIRecord],
    store: &EmbeddingStore<T>,
    config: &MiningConfig,
) -> Result<MiningOutput, MiningError> {
    batch_mine_with_titles(records, &item_titles(records), store, config)
}

/// First-seen title per item id.
pub fn item_titles(records: &[QIRecord]) -> HashMap<String, String> {
    let mut titles = HashMap::new();
    for r in records {
        titles
            .entry(r.item_id.clone())
            .or_insert_with(|| r.item_title.clone());
    }
    titles
}

/// Record index and the chosen (row, similarity) or the reason there is none.
type Pick = (usize, Result<(usize, f64), MiningError>);

fn mine_chunk<T: Scalar>(
    partition: &Partition<T>,
    dimension: usize,
    language: LanguageTag,
    chunk: &[(usize, usize)],
    config: &MiningConfig,
) -> Vec<Pick> {
    let rows: Vec<usize> = chunk.iter().map(|&(_, row)| row).collect();
    let tau = config.hard_threshold;
    let picks: Vec<Result<(usize, f64), MiningError>> = match (config.mode, config.hard_pick) {
        (MiningMode::Easy, _) => {
            let mut sel: Vec<Lowest> = rows
                .iter()
                .map(|&r| Lowest {
                    exclude: r,
                    best: None,
                })
                .collect();
            kernel::scan(partition, dimension, &rows, &mut sel);
            sel.into_iter()
                .map(|s| s.best.ok_or(MiningError::NoCandidates(language)))
                .collect()
        }
        (MiningMode::Hard, HardPick::Closest) => {
            let mut sel: Vec<ClosestBelow> = rows
                .iter()
                .map(|&r| ClosestBelow {
                    exclude: r,
                    threshold: tau,
                    best: None,
                })
                .collect();
            kernel::scan(partition, dimension, &rows, &mut sel);
            sel.into_iter()
                .map(|s| match s.best {
                    Some(b) => Ok(b),
                    None if partition.len() < 2 => Err(MiningError::NoCandidates(language)),
                    None => Err(MiningError::NoCandidatesBelowThreshold(tau)),
                })
                .collect()
        }
        (MiningMode::Hard, HardPick::UniformBelow) => {
            let mut sel: Vec<AllBelow> = rows
                .iter()
                .map(|&r| AllBelow {
                    exclude: r,
                    threshold: tau,
                    hits: Vec::new(),
                })
                .collect();
            kernel::scan(partition, dimension, &rows, &mut sel);
            sel.into_iter()
                .zip(chunk)
                .map(|(s, &(index, _))| {
                    if s.hits.is_empty() {
                        return Err(if partition.len() < 2 {
                            MiningError::NoCandidates(language)
                        } else {
                            MiningError::NoCandidatesBelowThreshold(tau)
                        });
                    }
                    let mut rng = seed::rng_for(config.seed, index as u64);
                    Ok(s.hits[rng.gen_range(0..s.hits.len())])
                })
                .collect()
        }
    };
    chunk.iter().map(|&(index, _)| index).zip(picks).collect()
}
