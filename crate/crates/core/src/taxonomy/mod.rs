//! Category taxonomy and QC negative generation.

mod generator;
mod negatives;
mod tree;

pub use generator::{
    GenerationRequest, GenerationResponse, GeneratorError, ProcessGenerator, QueryGenerator,
    ScriptedGenerator, StubGenerator,
};
pub use negatives::{
    gen_neg_cross_root, gen_neg_same_l1, gen_neg_sibling_leaf, gen_neg_synthetic_query,
    generate_negatives, positive_keys, satisfies_structure, GenerationDiagnostic, GenerationOutput,
    NegativeError, NegativeGenConfig, Strategy, DEFAULT_MAX_RESAMPLES,
};
pub use tree::{build_taxonomy, Node, NodeId, TaxonomyTree};
