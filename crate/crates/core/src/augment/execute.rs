use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::translate::{TranslateError, Translator};
use super::{AugmentError, TranslationPlan};
use crate::corpus::{LanguageTag, Record};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecuteOptions {
    pub batch_size: usize,
    /// Extra attempts after a failed batch.
    pub retries: u32,
    /// Batches in flight at once.
    pub concurrency: usize,
}

impl Default for ExecuteOptions {
    fn default() -> Self {
        ExecuteOptions {
            batch_size: 64,
            retries: 3,
            concurrency: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentDiagnostic {
    pub target: LanguageTag,
    pub source_index: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExecuteOutput<R> {
    /// Translated records in plan order.
    pub records: Vec<R>,
    pub diagnostics: Vec<AugmentDiagnostic>,
}

struct Batch {
    /// Plan-order position of each entry.
    positions: Vec<usize>,
    sources: Vec<usize>,
    source_lang: LanguageTag,
    target: LanguageTag,
}

fn build_batches<R: Record>(
    plan: &TranslationPlan,
    records: &[R],
    batch_size: usize,
) -> Vec<Batch> {
    let mut batches = Vec::new();
    let mut position = 0;
    for lang_plan in &plan.languages {
        // Batches carry a single source language.
        let mut by_source: BTreeMap<LanguageTag, Vec<(usize, usize)>> = BTreeMap::new();
        for &src in &lang_plan.sources {
            by_source
                .entry(records[src].language())
                .or_default()
                .push((position, src));
            position += 1;
        }
        for (source_lang, entries) in by_source {
            for chunk in entries.chunks(batch_size) {
                batches.push(Batch {
                    positions: chunk.iter().map(|e| e.0).collect(),
                    sources: chunk.iter().map(|e| e.1).collect(),
                    source_lang,
                    target: lang_plan.target,
                });
            }
        }
    }
    batches
}

type BatchResult = Result<Vec<String>, TranslateError>;

fn run_batch<R: Record>(
    batch: &Batch,
    records: &[R],
    translator: &dyn Translator,
    retries: u32,
) -> Result<Vec<String>, TranslateError> {
    let texts: Vec<String> = batch
        .sources
        .iter()
        .map(|&i| records[i].query().to_string())
        .collect();
    let mut last = None;
    for _ in 0..=retries {
        match translator.translate(&texts, batch.source_lang, batch.target) {
            Ok(out) if out.len() == texts.len() => return Ok(out),
            Ok(out) => {
                last = Some(TranslateError::LengthMismatch {
                    expected: texts.len(),
                    found: out.len(),
                })
            }
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Translates every planned entry.
///
/// Each output record copies its source's target field and label, with the
/// translated query, the target language and origin `translated`. Entries
/// of batches that still fail after `retries` extra attempts become
/// diagnostics; if every batch fails the translator is reported unavailable.
pub fn execute_plan<R: Record>(
    plan: &TranslationPlan,
    records: &[R],
    translator: &dyn Translator,
    options: &ExecuteOptions,
) -> Result<ExecuteOutput<R>, AugmentError> {
    if plan.task != R::TASK {
        return Err(AugmentError::TaskMismatch {
            plan: plan.task,
            records: R::TASK,
        });
    }
    if plan.source_count != records.len() {
        return Err(AugmentError::SourceCountMismatch {
            plan: plan.source_count,
            records: records.len(),
        });
    }
    if let Some(&bad) = plan
        .languages
        .iter()
        .flat_map(|l| &l.sources)
        .find(|&&i| i >= records.len())
    {
        return Err(AugmentError::BadPlan(format!(
            "source index {bad} out of range"
        )));
    }
    if options.batch_size == 0 {
        return Err(AugmentError::BadOptions(
            "batch size must be positive".into(),
        ));
    }

    let batches = build_batches(plan, records, options.batch_size);
    let results: Vec<Mutex<Option<BatchResult>>> =
        batches.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = options.concurrency.max(1).min(batches.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let b = next.fetch_add(1, Ordering::Relaxed);
                let Some(batch) = batches.get(b) else { break };
                let out = run_batch(batch, records, translator, options.retries);
                *results[b].lock().expect("result slot") = Some(out);
            });
        }
    });

    let total = plan.total();
    let mut slots: Vec<Option<R>> = (0..total).map(|_| None).collect();
    let mut diagnostics = Vec::new();
    let mut failed_batches = 0;
    for (batch, result) in batches.iter().zip(results) {
        let result = result
            .into_inner()
            .expect("result slot")
            .expect("every batch ran");
        match result {
            Ok(texts) => {
                for ((&pos, &src), text) in batch.positions.iter().zip(&batch.sources).zip(texts) {
                    if text.trim().is_empty() || text.contains(['\t', '\n']) {
                        diagnostics.push(AugmentDiagnostic {
                            target: batch.target,
                            source_index: src,
                            reason: "translation is empty or contains a tab or newline".into(),
                        });
                        continue;
                    }
                    slots[pos] = Some(records[src].translated(text, batch.target));
                }
            }
            Err(e) => {
                failed_batches += 1;
                diagnostics.extend(batch.sources.iter().map(|&src| AugmentDiagnostic {
                    target: batch.target,
                    source_index: src,
                    reason: e.to_string(),
                }));
            }
        }
    }
    if !batches.is_empty() && failed_batches == batches.len() {
        return Err(AugmentError::TranslatorUnavailable(
            diagnostics
                .first()
                .map(|d| d.reason.clone())
                .unwrap_or_default(),
        ));
    }
    diagnostics.sort_by_key(|d| {
        (
            LanguageTag::ALL.iter().position(|&l| l == d.target),
            d.source_index,
        )
    });
    Ok(ExecuteOutput {
        records: slots.into_iter().flatten().collect(),
        diagnostics,
    })
}
