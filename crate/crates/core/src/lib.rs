//! Elicit semantic feature norms from a text-completion model, normalize the
//! raw completions into canonical features, and compare the resulting norm
//! with human norms and similarity benchmarks.
//!
//! The crate is organised as a pipeline:
//!
//! * [`elicitation`] builds priming prompts and collects raw completions,
//! * [`normalize`] turns completions into a [`FeatureNorm`],
//! * [`norms`] filters norms and computes descriptive statistics,
//! * [`analysis`] and [`evaluation`] hold the similarity, clustering,
//!   correlation and variance-partitioning analyses,
//! * [`ingestion`] reads human norms, concept lists and benchmarks.

pub mod analysis;
pub mod elicitation;
pub mod error;
pub mod evaluation;
pub mod ingestion;
pub mod lexicon;
pub mod model;
pub mod normalize;
pub mod norms;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use model::{
    CategoryScheme, Concept, ConceptFeatureMatrix, FeatureNorm, NormEntry, Provenance, SimilarityMatrix, Violation,
};
