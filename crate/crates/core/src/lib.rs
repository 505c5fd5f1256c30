//! Curation toolkit for multilingual search-relevance training data.
//!
//! Covers the query-category (QC) and query-item (QI) tasks end to end:
//! parsing and cleaning corpora, taxonomy- and embedding-based negative
//! generation, translation augmentation, leakage-free splits and F1
//! evaluation.
//!
//! Numeric code is generic over the element type ([`Scalar`] for embedding
//! math, any `num_traits::Num` for metrics); the aliases below pin the
//! common instantiations.

pub mod augment;
pub mod cleanse;
pub mod corpus;
pub mod embed;
pub mod metrics;
pub mod report;
pub mod scalar;
pub mod seed;
pub mod split;
pub mod taxonomy;

pub use scalar::Scalar;

/// Embedding store with 32-bit elements, matching the on-disk format.
pub type EmbeddingStoreF32 = embed::EmbeddingStore<f32>;
/// Embedding store with 64-bit elements.
pub type EmbeddingStoreF64 = embed::EmbeddingStore<f64>;
/// Exact rational metric values.
pub type Rational = num_rational::Ratio<u64>;
