//! Positive-class precision, recall and F1, per language and pooled.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::iter::Sum;
use std::ops::Add;
use std::path::Path;

use num_traits::Num;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Label, LanguageTag, Record, Task};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("gold has {gold} labels but predictions have {pred}")]
    LengthMismatch { gold: usize, pred: usize },
    #[error("invalid label {value} at position {index}")]
    InvalidLabel { index: usize, value: u8 },
    #[error("line {line}: {reason}")]
    Prediction { line: usize, reason: String },
    #[error("prediction for index {0} given twice")]
    DuplicateIndex(usize),
    #[error("no prediction for index {0}")]
    MissingIndex(usize),
    #[error("prediction index {index} outside 0..{len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    fn record(&mut self, gold: bool, pred: bool) {
        match (gold, pred) {
            (true, true) => self.tp += 1,
            (false, true) => self.fp += 1,
            (true, false) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }

    pub fn precision<T: MetricValue>(&self) -> T {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall<T: MetricValue>(&self) -> T {
        ratio(self.tp, self.tp + self.fn_)
    }

    /// F1 with every undefined ratio taken as zero.
    pub fn f1<T: MetricValue>(&self) -> T {
        let p: T = self.precision();
        let r: T = self.recall();
        if p + r == T::zero() {
            return T::zero();
        }
        let two = T::from_count(2);
        two * p * r / (p + r)
    }
}

impl Add for ConfusionCounts {
    type Output = ConfusionCounts;

    fn add(self, rhs: Self) -> Self {
        ConfusionCounts {
            tp: self.tp + rhs.tp,
            fp: self.fp + rhs.fp,
            fn_: self.fn_ + rhs.fn_,
            tn: self.tn + rhs.tn,
        }
    }
}

impl Sum for ConfusionCounts {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(ConfusionCounts::default(), Add::add)
    }
}

/// Numeric types metrics can be computed in.
pub trait MetricValue: Num + Copy {
    fn from_count(n: u64) -> Self;
}

impl MetricValue for f32 {
    fn from_count(n: u64) -> Self {
        n as f32
    }
}

impl MetricValue for f64 {
    fn from_count(n: u64) -> Self {
        n as f64
    }
}

impl MetricValue for num_rational::Ratio<u64> {
    fn from_count(n: u64) -> Self {
        num_rational::Ratio::from_integer(n)
    }
}

fn ratio<T: MetricValue>(num: u64, den: u64) -> T {
    if den == 0 {
        T::zero()
    } else {
        T::from_count(num) / T::from_count(den)
    }
}

pub fn precision<T: MetricValue>(c: &ConfusionCounts) -> T {
    c.precision()
}

pub fn recall<T: MetricValue>(c: &ConfusionCounts) -> T {
    c.recall()
}

pub fn f1_positive<T: MetricValue>(c: &ConfusionCounts) -> T {
    c.f1()
}

/// Tallies 0/1 labels pairwise.
pub fn confusion_counts(gold: &[u8], pred: &[u8]) -> Result<ConfusionCounts, MetricsError> {
    if gold.len() != pred.len() {
        return Err(MetricsError::LengthMismatch {
            gold: gold.len(),
            pred: pred.len(),
        });
    }
    let mut c = ConfusionCounts::default();
    for (index, (&g, &p)) in gold.iter().zip(pred).enumerate() {
        for value in [g, p] {
            if value > 1 {
                return Err(MetricsError::InvalidLabel { index, value });
            }
        }
        c.record(g == 1, p == 1);
    }
    Ok(c)
}

/// Unweighted mean of task scores; zero for an empty slice.
pub fn average_f1<T: MetricValue>(scores: &[T]) -> T {
    if scores.is_empty() {
        return T::zero();
    }
    let sum = scores.iter().fold(T::zero(), |a, &b| a + b);
    sum / T::from_count(scores.len() as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub counts: ConfusionCounts,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl From<ConfusionCounts> for Scores {
    fn from(counts: ConfusionCounts) -> Self {
        Scores {
            counts,
            precision: counts.precision(),
            recall: counts.recall(),
            f1: counts.f1(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub task: Task,
    pub pairs: u64,
    pub languages: BTreeMap<LanguageTag, Scores>,
    /// Pooled over all pairs; the headline score.
    pub micro: Scores,
    /// Unweighted mean of per-language F1.
    pub macro_f1: f64,
}

impl MetricsReport {
    pub fn to_json(&self) -> String {
        crate::report::to_stable_json(self)
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<10} {:>8} {:>10} {:>8} {:>8}",
            "language", "pairs", "precision", "recall", "f1"
        );
        let mut row = |name: &str, s: &Scores| {
            let _ = writeln!(
                out,
                "{:<10} {:>8} {:>10.4} {:>8.4} {:>8.4}",
                name,
                s.counts.total(),
                s.precision,
                s.recall,
                s.f1
            );
        };
        for (lang, s) in &self.languages {
            row(lang.code(), s);
        }
        row("micro", &self.micro);
        let _ = writeln!(
            out,
            "{:<10} {:>8} {:>10} {:>8} {:>8.4}",
            "macro", "", "", "", self.macro_f1
        );
        out
    }
}

/// Averages the headline F1 of several task reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossTaskSummary {
    pub tasks: BTreeMap<Task, f64>,
    pub average_f1: f64,
}

impl CrossTaskSummary {
    pub fn from_reports(reports: &[MetricsReport]) -> Self {
        let tasks: BTreeMap<Task, f64> = reports.iter().map(|r| (r.task, r.micro.f1)).collect();
        let scores: Vec<f64> = reports.iter().map(|r| r.micro.f1).collect();
        CrossTaskSummary {
            tasks,
            average_f1: average_f1(&scores),
        }
    }
}

const SHARD: usize = 4096;

/// Scores predictions against gold records joined by position.
pub fn evaluate<R: Record>(gold: &[R], pred: &[Label]) -> Result<MetricsReport, MetricsError> {
    if gold.len() != pred.len() {
        return Err(MetricsError::LengthMismatch {
            gold: gold.len(),
            pred: pred.len(),
        });
    }
    let languages = gold
        .par_chunks(SHARD)
        .zip(pred.par_chunks(SHARD))
        .map(|(g, p)| {
            let mut m: BTreeMap<LanguageTag, ConfusionCounts> = BTreeMap::new();
            for (r, l) in g.iter().zip(p) {
                m.entry(r.language())
                    .or_default()
                    .record(r.label().is_positive(), l.is_positive());
            }
            m
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (lang, c) in b {
                let e = a.entry(lang).or_default();
                *e = *e + c;
            }
            a
        });
    let pooled: ConfusionCounts = languages.values().copied().sum();
    let per_language: BTreeMap<LanguageTag, Scores> =
        languages.into_iter().map(|(l, c)| (l, c.into())).collect();
    let f1s: Vec<f64> = per_language.values().map(|s| s.f1).collect();
    Ok(MetricsReport {
        task: R::TASK,
        pairs: pooled.total(),
        languages: per_language,
        micro: pooled.into(),
        macro_f1: average_f1(&f1s),
    })
}

/// Parses an `index\tlabel` file with header into labels ordered by index.
pub fn parse_predictions(text: &str, expected: usize) -> Result<Vec<Label>, MetricsError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim_end_matches('\r') == "index\tlabel" => {}
        _ => {
            return Err(MetricsError::Prediction {
                line: 1,
                reason: "expected header \"index\\tlabel\"".into(),
            })
        }
    }
    let mut by_index: HashMap<usize, Label> = HashMap::with_capacity(expected);
    for (i, line) in lines {
        let line_no = i + 1;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let bad = |reason: &str| MetricsError::Prediction {
            line: line_no,
            reason: reason.to_string(),
        };
        let (idx, label) = line
            .split_once('\t')
            .ok_or_else(|| bad("expected 2 fields"))?;
        let index: usize = idx
            .parse()
            .map_err(|_| bad("index is not a non-negative integer"))?;
        let label: Label = label.parse().map_err(|_| bad("label out of range"))?;
        if index >= expected {
            return Err(MetricsError::IndexOutOfRange {
                index,
                len: expected,
            });
        }
        if by_index.insert(index, label).is_some() {
            return Err(MetricsError::DuplicateIndex(index));
        }
    }
    (0..expected)
        .map(|i| {
            by_index
                .get(&i)
                .copied()
                .ok_or(MetricsError::MissingIndex(i))
        })
        .collect()
}

pub fn load_predictions(
    path: impl AsRef<Path>,
    expected: usize,
) -> Result<Vec<Label>, MetricsError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| MetricsError::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    parse_predictions(&text, expected)
}

pub fn predictions_to_tsv(labels: &[Label]) -> String {
    let mut out = String::from("index\tlabel\n");
    for (i, l) in labels.iter().enumerate() {
        let _ = writeln!(out, "{i}\t{}", l.as_u8());
    }
    out
}
