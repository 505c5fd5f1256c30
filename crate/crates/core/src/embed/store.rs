use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::format::{Embv1Entry, Embv1File};
use super::EmbedError;
use crate::corpus::LanguageTag;
use crate::Scalar;

/// Unit vectors of one language, row-major.
#[derive(Debug, Clone, Default)]
pub struct Partition<T> {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<T>,
}

impl<T: Scalar> Partition<T> {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn position(&self, item_id: &str) -> Option<usize> {
        self.index.get(item_id).copied()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize, dimension: usize) -> &[T] {
        &self.data[i * dimension..(i + 1) * dimension]
    }
}

/// A vector that was not loaded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadDiagnostic {
    /// Position of the record in the file.
    pub record: usize,
    pub language: String,
    pub item_id: String,
    pub reason: String,
}

/// Language-partitioned item vectors, unit-normalized on insertion.
#[derive(Debug, Clone)]
pub struct EmbeddingStore<T: Scalar> {
    dimension: usize,
    partitions: BTreeMap<LanguageTag, Partition<T>>,
}

/// Maximum deviation of a stored vector's L2 norm from 1.
pub const NORM_TOLERANCE: f64 = 1e-4;

impl<T: Scalar> EmbeddingStore<T> {
    pub fn new(dimension: usize) -> Result<Self, EmbedError> {
        if dimension == 0 {
            return Err(EmbedError::ZeroDimension);
        }
        Ok(EmbeddingStore {
            dimension,
            partitions: BTreeMap::new(),
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn partition(&self, language: LanguageTag) -> Option<&Partition<T>> {
        self.partitions.get(&language)
    }

    pub fn languages(&self) -> impl Iterator<Item = LanguageTag> + '_ {
        self.partitions.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.partitions.values().map(Partition::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn vector(&self, language: LanguageTag, item_id: &str) -> Option<&[T]> {
        let p = self.partitions.get(&language)?;
        p.position(item_id).map(|i| p.row(i, self.dimension))
    }

    /// Normalizes and stores `vector`.
    ///
    /// Returns `Ok(Some(reason))` when the vector is skipped because it has
    /// zero norm or a non-finite component.
    pub fn insert<S: Scalar>(
        &mut self,
        language: LanguageTag,
        item_id: &str,
        vector: &[S],
    ) -> Result<Option<String>, EmbedError> {
        if vector.len() != self.dimension {
            return Err(EmbedError::DimensionMismatch {
                expected: self.dimension,
                found: vector.len(),
            });
        }
        if vector.iter().any(|x| !x.is_finite()) {
            return Ok(Some("non-finite component".into()));
        }
        let norm = vector
            .iter()
            .map(|x| x.widen() * x.widen())
            .sum::<f64>()
            .sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Ok(Some("zero-norm vector".into()));
        }
        let partition = self.partitions.entry(language).or_default();
        if partition.index.contains_key(item_id) {
            return Err(EmbedError::DuplicateId {
                language: language.code().to_string(),
                item_id: item_id.to_string(),
            });
        }
        partition
            .index
            .insert(item_id.to_string(), partition.ids.len());
        partition.ids.push(item_id.to_string());
        partition
            .data
            .extend(vector.iter().map(|x| T::narrow(x.widen() / norm)));
        Ok(None)
    }

    pub fn from_embv1(file: &Embv1File) -> Result<(Self, Vec<LoadDiagnostic>), EmbedError> {
        let mut store = EmbeddingStore::new(file.dimension as usize)?;
        let mut diagnostics = Vec::new();
        for (record, entry) in file.entries.iter().enumerate() {
            let language: LanguageTag = entry
                .language
                .parse()
                .map_err(|_| EmbedError::UnknownLanguage(entry.language.clone()))?;
            if entry.item_id.is_empty() {
                return Err(EmbedError::EmptyItemId(record));
            }
            if let Some(reason) = store.insert(language, &entry.item_id, &entry.vector)? {
                diagnostics.push(LoadDiagnostic {
                    record,
                    language: entry.language.clone(),
                    item_id: entry.item_id.clone(),
                    reason,
                });
            }
        }
        Ok((store, diagnostics))
    }

    pub fn to_embv1(&self) -> Embv1File {
        let entries = self
            .partitions
            .iter()
            .flat_map(|(lang, p)| {
                p.ids.iter().enumerate().map(move |(i, id)| Embv1Entry {
                    language: lang.code().to_string(),
                    item_id: id.clone(),
                    vector: p
                        .row(i, self.dimension)
                        .iter()
                        .map(|x| x.widen() as f32)
                        .collect(),
                })
            })
            .collect();
        Embv1File {
            dimension: self.dimension as u32,
            entries,
        }
    }
}

/// Reads an EMBV1 file into a normalized store.
pub fn load_embeddings<T: Scalar>(
    path: impl AsRef<Path>,
) -> Result<(EmbeddingStore<T>, Vec<LoadDiagnostic>), EmbedError> {
    EmbeddingStore::from_embv1(&Embv1File::read(path)?)
}
