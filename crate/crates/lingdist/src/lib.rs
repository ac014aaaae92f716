//! Language representations and pairwise distance measures built from
//! typological, lexical, genealogical, and conceptual data sources, plus the
//! evaluation protocol on top of them: k-nearest-neighbor majority-family
//! classification, neighbor-family distributions, feature coverage, and the
//! feature-count trade-off.

pub mod conceptualizer;
pub mod eval;
pub mod ingest;
pub mod metrics;
pub mod model;
pub mod report;

pub use model::{
    binarize, concatenate_language_vector, top_level_family, CellValue, ConceptVectorSet,
    DistanceMatrix, FeatureTable, LanguageId, LanguageProfile, LineagePath, MatrixKind,
    ModelError, WordListTable,
};
