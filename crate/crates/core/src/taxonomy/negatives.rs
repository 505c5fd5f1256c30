//! QC negative generation by category-path perturbation or query replacement.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generator::{GenerationRequest, QueryGenerator};
use super::tree::{NodeId, TaxonomyTree};
use crate::corpus::{normalize, CanonicalKey, CategoryPath, Label, Origin, QCRecord, Record};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Any other observed path under the record's level-1 node.
    SameL1,
    /// Same parent, different last level.
    SiblingLeaf,
    /// Any observed path under a different root.
    CrossRoot,
    /// Same path, generated unrelated query.
    SyntheticQuery,
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "same-l1" => Ok(Strategy::SameL1),
            "sibling-leaf" => Ok(Strategy::SiblingLeaf),
            "cross-root" => Ok(Strategy::CrossRoot),
            "synthetic-query" => Ok(Strategy::SyntheticQuery),
            _ => Err(format!(
                "unknown strategy {s:?} (expected same-l1, sibling-leaf, cross-root or synthetic-query)"
            )),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::SameL1 => "same-l1",
            Strategy::SiblingLeaf => "sibling-leaf",
            Strategy::CrossRoot => "cross-root",
            Strategy::SyntheticQuery => "synthetic-query",
        })
    }
}

pub const DEFAULT_MAX_RESAMPLES: u32 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NegativeGenConfig {
    pub strategy: Strategy,
    pub seed: u64,
    /// Upper bound on draws per record before giving up.
    pub max_resamples: u32,
}

impl NegativeGenConfig {
    pub fn new(strategy: Strategy, seed: u64) -> Self {
        NegativeGenConfig {
            strategy,
            seed,
            max_resamples: DEFAULT_MAX_RESAMPLES,
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum NegativeError {
    #[error("record is not a positive")]
    NotPositive,
    #[error("path depth {0} is below the minimum of 2")]
    PathTooShallow(usize),
    #[error("path {0:?} is not an observed path of the taxonomy")]
    PathNotInTree(String),
    #[error("no alternative path available")]
    NoAlternative,
    #[error("all {0} draws collided with existing positives")]
    CollisionExhausted(u32),
    #[error("query generator unavailable: {0}")]
    GeneratorUnavailable(String),
}

fn check_record(record: &QCRecord, tree: &TaxonomyTree) -> Result<NodeId, NegativeError> {
    if record.label != Label::Positive {
        return Err(NegativeError::NotPositive);
    }
    if record.path.depth() < 2 {
        return Err(NegativeError::PathTooShallow(record.path.depth()));
    }
    tree.find(&record.path)
        .filter(|&id| tree.node(id).observed)
        .ok_or_else(|| NegativeError::PathNotInTree(record.path.render()))
}

fn negative_with_path(record: &QCRecord, path: CategoryPath) -> QCRecord {
    QCRecord {
        query: record.query.clone(),
        language: record.language,
        path,
        label: Label::Negative,
        origin: Origin::GeneratedNegative,
    }
}

/// Draws candidates uniformly without replacement until one avoids the
/// positive set or `max_draws` is reached.
fn draw<R: Rng>(
    record: &QCRecord,
    tree: &TaxonomyTree,
    mut candidates: Vec<NodeId>,
    positives: &HashSet<CanonicalKey>,
    max_draws: u32,
    rng: &mut R,
) -> Result<QCRecord, NegativeError> {
    if candidates.is_empty() {
        return Err(NegativeError::NoAlternative);
    }
    let attempts = (max_draws.max(1) as usize).min(candidates.len());
    for i in 0..attempts {
        let j = rng.gen_range(i..candidates.len());
        candidates.swap(i, j);
        let negative = negative_with_path(record, tree.node(candidates[i]).path.clone());
        if !positives.contains(&negative.canonical_key()) {
            return Ok(negative);
        }
    }
    Err(NegativeError::CollisionExhausted(attempts as u32))
}

fn same_l1_with<R: Rng>(
    record: &QCRecord,
    tree: &TaxonomyTree,
    positives: &HashSet<CanonicalKey>,
    max_draws: u32,
    rng: &mut R,
) -> Result<QCRecord, NegativeError> {
    let own = check_record(record, tree)?;
    let l1 = record
        .path
        .prefix(2)
        .and_then(|p| tree.find(&p))
        .expect("ancestor of a tree node");
    let candidates = tree
        .observed_in_subtree(l1)
        .into_iter()
        .filter(|&id| id != own)
        .collect();
    draw(record, tree, candidates, positives, max_draws, rng)
}

fn sibling_leaf_with<R: Rng>(
    record: &QCRecord,
    tree: &TaxonomyTree,
    positives: &HashSet<CanonicalKey>,
    max_draws: u32,
    rng: &mut R,
) -> Result<QCRecord, NegativeError> {
    let own = check_record(record, tree)?;
    let parent = tree.node(own).parent.expect("depth >= 2 has a parent");
    let candidates = tree
        .node(parent)
        .children
        .values()
        .copied()
        .filter(|&id| id != own && tree.node(id).observed)
        .collect();
    draw(record, tree, candidates, positives, max_draws, rng)
}

fn cross_root_with<R: Rng>(
    record: &QCRecord,
    tree: &TaxonomyTree,
    positives: &HashSet<CanonicalKey>,
    max_draws: u32,
    rng: &mut R,
) -> Result<QCRecord, NegativeError> {
    check_record(record, tree)?;
    let own_root = record.path.level(0).expect("non-empty path");
    let candidates = tree
        .roots()
        .filter(|&r| tree.node(r).name != own_root)
        .flat_map(|r| tree.observed_in_subtree(r))
        .collect();
    draw(record, tree, candidates, positives, max_draws, rng)
}

/// Replaces the path with another observed path under the same level-1 node.
pub fn gen_neg_same_l1(
    record: &QCRecord,
    tree: &TaxonomyTree,
    positives: &HashSet<CanonicalKey>,
    config: &NegativeGenConfig,
) -> Result<QCRecord, NegativeError> {
    same_l1_with(
        record,
        tree,
        positives,
        config.max_resamples,
        &mut seed::rng(config.seed),
    )
}

/// Replaces the last level with an observed sibling.
pub fn gen_neg_sibling_leaf(
    record: &QCRecord,
    tree: &TaxonomyTree,
    positives: &HashSet<CanonicalKey>,
    config: &NegativeGenConfig,
) -> Result<QCRecord, NegativeError> {
    sibling_leaf_with(
        record,
        tree,
        positives,
        config.max_resamples,
        &mut seed::rng(config.seed),
    )
}

/// Replaces the path with an observed path under another root.
pub fn gen_neg_cross_root(
    record: &QCRecord,
    tree: &TaxonomyTree,
    positives: &HashSet<CanonicalKey>,
    config: &NegativeGenConfig,
) -> Result<QCRecord, NegativeError> {
    cross_root_with(
        record,
        tree,
        positives,
        config.max_resamples,
        &mut seed::rng(config.seed),
    )
}

/// Keeps the path and asks `generator` for a replacement query.
///
/// Outputs equal (after normalization) to the original query, or whose key
/// is already a positive, are rejected and re-requested.
pub fn gen_neg_synthetic_query(
    record: &QCRecord,
    generator: &dyn QueryGenerator,
    positives: &HashSet<CanonicalKey>,
    max_resamples: u32,
) -> Result<QCRecord, NegativeError> {
    if record.label != Label::Positive {
        return Err(NegativeError::NotPositive);
    }
    let request = GenerationRequest {
        query: record.query.clone(),
        language: record.language,
        path: record.path.render(),
    };
    let original = normalize(&record.query);
    let attempts = max_resamples.max(1);
    for attempt in 0..attempts {
        let query = generator
            .generate(&request, attempt)
            .map_err(|e| NegativeError::GeneratorUnavailable(e.to_string()))?;
        let candidate = QCRecord {
            query,
            language: record.language,
            path: record.path.clone(),
            label: Label::Negative,
            origin: Origin::GeneratedNegative,
        };
        let key = candidate.canonical_key();
        let usable = !key.norm_query.is_empty()
            && !candidate.query.contains(['\t', '\n'])
            && key.norm_query != original
            && !positives.contains(&key);
        if usable {
            return Ok(candidate);
        }
    }
    Err(NegativeError::CollisionExhausted(attempts))
}

/// Canonical keys of every positive record.
pub fn positive_keys<R: Record>(records: &[R]) -> HashSet<CanonicalKey> {
    records
        .iter()
        .filter(|r| r.label().is_positive())
        .map(Record::canonical_key)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationDiagnostic {
    /// Position of the source record in the input.
    pub index: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct GenerationOutput {
    pub negatives: Vec<QCRecord>,
    pub diagnostics: Vec<GenerationDiagnostic>,
}

/// One negative per positive record, in input order.
///
/// Record `i` draws from a stream seeded by `(config.seed, i)`, so output is
/// the same for any thread count.
pub fn generate_negatives(
    records: &[QCRecord],
    tree: &TaxonomyTree,
    positives: &HashSet<CanonicalKey>,
    config: &NegativeGenConfig,
    generator: Option<&dyn QueryGenerator>,
) -> GenerationOutput {
    let results: Vec<(usize, Result<QCRecord, NegativeError>)> = records
        .par_iter()
        .enumerate()
        .filter(|(_, r)| r.label.is_positive())
        .map(|(i, r)| {
            let mut rng = seed::rng_for(config.seed, i as u64);
            let draws = config.max_resamples;
            let result = match config.strategy {
                Strategy::SameL1 => same_l1_with(r, tree, positives, draws, &mut rng),
                Strategy::SiblingLeaf => sibling_leaf_with(r, tree, positives, draws, &mut rng),
                Strategy::CrossRoot => cross_root_with(r, tree, positives, draws, &mut rng),
                Strategy::SyntheticQuery => match generator {
                    Some(g) => gen_neg_synthetic_query(r, g, positives, draws),
                    None => Err(NegativeError::GeneratorUnavailable(
                        "no generator configured".into(),
                    )),
                },
            };
            (i, result)
        })
        .collect();

    let mut output = GenerationOutput::default();
    for (index, result) in results {
        match result {
            Ok(n) => output.negatives.push(n),
            Err(e) => output.diagnostics.push(GenerationDiagnostic {
                index,
                reason: e.to_string(),
            }),
        }
    }
    output
}

/// Structural postcondition of `strategy` for a generated negative.
pub fn satisfies_structure(
    strategy: Strategy,
    source: &CategoryPath,
    generated: &CategoryPath,
) -> bool {
    let (s, g) = (source.levels(), generated.levels());
    match strategy {
        Strategy::SameL1 => s.len() >= 2 && g.len() >= 2 && s[..2] == g[..2] && s != g,
        Strategy::SiblingLeaf => {
            s.len() == g.len() && s[..s.len() - 1] == g[..g.len() - 1] && s.last() != g.last()
        }
        Strategy::CrossRoot => s[0] != g[0],
        Strategy::SyntheticQuery => s == g,
    }
}
