//! Train/validation/test splitting.
//!
//! Query-disjoint mode assigns whole normalized-query groups. The group hash
//! is FNV-1a 64 over the seed (8 bytes, little endian) followed by the UTF-8
//! normalized query, finalized with the SplitMix64 mixer. Its top 53 bits
//! form `u` in [0, 1), which picks the first split whose cumulative ratio
//! exceeds `u`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::corpus::{normalize, Record};
use crate::seed;

pub const DEFAULT_RATIOS: [f64; 3] = [0.9, 0.05, 0.05];
const RATIO_TOLERANCE: f64 = 1e-9;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SplitError {
    #[error("ratio {0} is not a positive finite number")]
    NonPositiveRatio(f64),
    #[error("ratios sum to {0}, expected 1")]
    RatioSum(f64),
    #[error("manifest covers {manifest} records but {records} were supplied")]
    CountMismatch { manifest: usize, records: usize },
    #[error("unknown split mode {0:?}")]
    UnknownMode(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitName {
    Train,
    Validation,
    Test,
}

impl SplitName {
    pub const ALL: [SplitName; 3] = [SplitName::Train, SplitName::Validation, SplitName::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            SplitName::Train => "train",
            SplitName::Validation => "validation",
            SplitName::Test => "test",
        }
    }

    fn ordinal(self) -> usize {
        self as usize
    }
}

impl fmt::Display for SplitName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitMode {
    Stratified,
    #[default]
    QueryDisjoint,
}

impl FromStr for SplitMode {
    type Err = SplitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "stratified" => Ok(SplitMode::Stratified),
            "query-disjoint" => Ok(SplitMode::QueryDisjoint),
            other => Err(SplitError::UnknownMode(other.to_string())),
        }
    }
}

impl fmt::Display for SplitMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SplitMode::Stratified => "stratified",
            SplitMode::QueryDisjoint => "query-disjoint",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub index: usize,
    pub split: SplitName,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub seed: u64,
    pub mode: SplitMode,
    pub ratios: [f64; 3],
    /// Record share of each split as produced.
    pub realized_ratios: [f64; 3],
    pub assignments: Vec<Assignment>,
}

impl SplitManifest {
    fn build(seed: u64, mode: SplitMode, ratios: [f64; 3], splits: Vec<SplitName>) -> Self {
        let mut counts = [0usize; 3];
        for s in &splits {
            counts[s.ordinal()] += 1;
        }
        let n = splits.len();
        let realized_ratios = counts.map(|c| if n == 0 { 0.0 } else { c as f64 / n as f64 });
        SplitManifest {
            seed,
            mode,
            ratios,
            realized_ratios,
            assignments: splits
                .into_iter()
                .enumerate()
                .map(|(index, split)| Assignment { index, split })
                .collect(),
        }
    }

    pub fn counts(&self) -> [usize; 3] {
        let mut counts = [0; 3];
        for a in &self.assignments {
            counts[a.split.ordinal()] += 1;
        }
        counts
    }

    pub fn to_json(&self) -> String {
        crate::report::to_stable_json(self)
    }

    pub fn load(path: impl AsRef<Path>) -> std::io::Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }
}

pub fn validate_ratios(ratios: &[f64; 3]) -> Result<(), SplitError> {
    if let Some(&bad) = ratios.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
        return Err(SplitError::NonPositiveRatio(bad));
    }
    let sum: f64 = ratios.iter().sum();
    if (sum - 1.0).abs() > RATIO_TOLERANCE {
        return Err(SplitError::RatioSum(sum));
    }
    Ok(())
}

/// Largest-remainder counts for `n` items; ties go to the earlier split.
fn stratum_counts(n: usize, ratios: &[f64; 3]) -> [usize; 3] {
    let ideal = ratios.map(|r| r * n as f64);
    let mut counts = ideal.map(|x| (x.floor() as usize).min(n));
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| (ideal[b] - ideal[b].floor()).total_cmp(&(ideal[a] - ideal[a].floor())));
    let mut left = n.saturating_sub(counts.iter().sum());
    for i in order.into_iter().cycle() {
        if left == 0 {
            break;
        }
        counts[i] += 1;
        left -= 1;
    }
    counts
}

/// Splits every (language, label) stratum independently by seeded shuffle.
pub fn split_stratified<R: Record>(
    records: &[R],
    ratios: [f64; 3],
    seed: u64,
) -> Result<SplitManifest, SplitError> {
    validate_ratios(&ratios)?;
    let mut strata: BTreeMap<(crate::corpus::LanguageTag, u8), Vec<usize>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        strata
            .entry((r.language(), r.label().as_u8()))
            .or_default()
            .push(i);
    }
    let mut splits = vec![SplitName::Train; records.len()];
    for (ordinal, members) in strata.values_mut().enumerate() {
        let mut rng = seed::rng_for(seed, ordinal as u64);
        members.shuffle(&mut rng);
        let counts = stratum_counts(members.len(), &ratios);
        let mut rest = &members[..];
        for (name, count) in SplitName::ALL.into_iter().zip(counts) {
            let (head, tail) = rest.split_at(count);
            for &i in head {
                splits[i] = name;
            }
            rest = tail;
        }
    }
    Ok(SplitManifest::build(
        seed,
        SplitMode::Stratified,
        ratios,
        splits,
    ))
}

/// Seeded 64-bit hash of an already-normalized query.
pub fn group_hash(seed: u64, normalized_query: &str) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    for &b in seed.to_le_bytes().iter().chain(normalized_query.as_bytes()) {
        h ^= b as u64;
        h = h.wrapping_mul(PRIME);
    }
    seed::mix64(h)
}

fn split_for_hash(hash: u64, ratios: &[f64; 3]) -> SplitName {
    let u = (hash >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    if u < ratios[0] {
        SplitName::Train
    } else if u < ratios[0] + ratios[1] {
        SplitName::Validation
    } else {
        SplitName::Test
    }
}

/// Assigns each normalized-query group wholesale, so no query spans two splits.
pub fn split_query_disjoint<R: Record>(
    records: &[R],
    ratios: [f64; 3],
    seed: u64,
) -> Result<SplitManifest, SplitError> {
    validate_ratios(&ratios)?;
    let mut cache: HashMap<String, SplitName> = HashMap::new();
    let splits = records
        .iter()
        .map(|r| {
            let q = normalize(r.query());
            *cache
                .entry(q)
                .or_insert_with_key(|q| split_for_hash(group_hash(seed, q), &ratios))
        })
        .collect();
    Ok(SplitManifest::build(
        seed,
        SplitMode::QueryDisjoint,
        ratios,
        splits,
    ))
}

pub fn split_records<R: Record>(
    records: &[R],
    mode: SplitMode,
    ratios: [f64; 3],
    seed: u64,
) -> Result<SplitManifest, SplitError> {
    match mode {
        SplitMode::Stratified => split_stratified(records, ratios, seed),
        SplitMode::QueryDisjoint => split_query_disjoint(records, ratios, seed),
    }
}

/// Materializes the three splits in input order.
pub fn partition_records<R: Record>(
    records: &[R],
    manifest: &SplitManifest,
) -> Result<[Vec<R>; 3], SplitError> {
    if manifest.assignments.len() != records.len() {
        return Err(SplitError::CountMismatch {
            manifest: manifest.assignments.len(),
            records: records.len(),
        });
    }
    let mut out: [Vec<R>; 3] = Default::default();
    for a in &manifest.assignments {
        out[a.split.ordinal()].push(records[a.index].clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Label, LanguageTag, QIRecord};
    use std::collections::HashSet;

    fn rec(q: &str, lang: LanguageTag, label: Label) -> QIRecord {
        QIRecord::new(q, lang, "i", "t", label).unwrap()
    }

    #[test]
    fn single_stratum_exact() {
        let records: Vec<_> = (0..100)
            .map(|i| rec(&format!("q{i}"), LanguageTag::En, Label::Positive))
            .collect();
        let m = split_stratified(&records, [0.8, 0.1, 0.1], 1).unwrap();
        assert_eq!(m.counts(), [80, 10, 10]);
    }

    #[test]
    fn two_strata() {
        let mut records: Vec<_> = (0..10)
            .map(|i| rec(&format!("a{i}"), LanguageTag::En, Label::Positive))
            .collect();
        records.extend((0..10).map(|i| rec(&format!("b{i}"), LanguageTag::En, Label::Negative)));
        let m = split_stratified(&records, [0.8, 0.1, 0.1], 1).unwrap();
        for half in m.assignments.chunks(10) {
            let mut c = [0; 3];
            for a in half {
                c[a.split.ordinal()] += 1;
            }
            assert_eq!(c, [8, 1, 1]);
        }
    }

    #[test]
    fn ratio_validation() {
        let r: Vec<QIRecord> = Vec::new();
        assert_eq!(
            split_stratified(&r, [0.5, 0.5, 0.1], 1).unwrap_err(),
            SplitError::RatioSum(1.1)
        );
        assert!(matches!(
            split_query_disjoint(&r, [1.0, 0.0, 0.0], 1),
            Err(SplitError::NonPositiveRatio(_))
        ));
        assert!(split_query_disjoint(&r, [0.8, 0.1, 0.1], 1).is_ok());
    }

    #[test]
    fn stratum_counts_within_one() {
        for n in 0..200 {
            for ratios in [
                [0.8, 0.1, 0.1],
                [0.9, 0.05, 0.05],
                [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
                [0.7, 0.2, 0.1],
            ] {
                let c = stratum_counts(n, &ratios);
                assert_eq!(c.iter().sum::<usize>(), n);
                for (k, r) in c.iter().zip(ratios) {
                    assert!((*k as f64 - r * n as f64).abs() <= 1.0);
                }
            }
        }
    }

    #[test]
    fn groups_stay_together() {
        let records = vec![
            rec("tv stand", LanguageTag::En, Label::Positive),
            rec("lamp", LanguageTag::En, Label::Positive),
            rec("TV  Stand", LanguageTag::Fr, Label::Negative),
        ];
        for seed in 0..50 {
            let m = split_query_disjoint(&records, [0.4, 0.3, 0.3], seed).unwrap();
            assert_eq!(m.assignments[0].split, m.assignments[2].split);
        }
    }

    #[test]
    fn order_independent() {
        let records: Vec<_> = (0..300)
            .map(|i| rec(&format!("q{}", i % 97), LanguageTag::En, Label::Positive))
            .collect();
        let mut reversed = records.clone();
        reversed.reverse();
        let a = split_query_disjoint(&records, DEFAULT_RATIOS, 9).unwrap();
        let b = split_query_disjoint(&reversed, DEFAULT_RATIOS, 9).unwrap();
        for (i, x) in a.assignments.iter().enumerate() {
            assert_eq!(x.split, b.assignments[records.len() - 1 - i].split);
        }
    }

    #[test]
    fn disjoint_query_sets() {
        let records: Vec<_> = (0..3000)
            .map(|i| {
                rec(
                    &format!("query {}", i % 1100),
                    LanguageTag::De,
                    Label::Positive,
                )
            })
            .collect();
        let m = split_query_disjoint(&records, [0.8, 0.1, 0.1], 3).unwrap();
        let parts = partition_records(&records, &m).unwrap();
        let sets: Vec<HashSet<String>> = parts
            .iter()
            .map(|p| p.iter().map(|r| normalize(&r.query)).collect())
            .collect();
        assert!(
            sets[0].is_disjoint(&sets[1])
                && sets[0].is_disjoint(&sets[2])
                && sets[1].is_disjoint(&sets[2])
        );
    }

    #[test]
    fn hash_is_stable() {
        // Pinned so manifests stay comparable across releases and platforms.
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in 7u64.to_le_bytes().iter().chain(b"tv stand") {
            h = (h ^ *b as u64).wrapping_mul(0x100_0000_01b3);
        }
        assert_eq!(group_hash(7, "tv stand"), seed::mix64(h));
        assert_ne!(group_hash(7, "tv stand"), group_hash(8, "tv stand"));
    }

    #[test]
    fn manifest_json_shape() {
        let records = vec![rec("a", LanguageTag::En, Label::Positive)];
        let m = split_query_disjoint(&records, [0.8, 0.1, 0.1], 1).unwrap();
        let v: serde_json::Value = serde_json::from_str(&m.to_json()).unwrap();
        assert_eq!(v["mode"], "query-disjoint");
        assert_eq!(v["assignments"][0]["index"], 0);
        assert!(v["assignments"][0]["split"].is_string());
        let back: SplitManifest = serde_json::from_str(&m.to_json()).unwrap();
        assert_eq!(back, m);
    }
}
