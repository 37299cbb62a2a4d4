//! Similarity matrices, category-structure scores and hierarchical
//! clustering.

mod category;
mod cluster;
mod similarity;

pub use category::{within_minus_between, CategoryAggregate, CategoryScores, ConceptScore};
pub use cluster::{hierarchical_cluster, hierarchical_cluster_with, Dendrogram, Linkage, Merge};
pub use similarity::{cosine, cosine_similarity_matrix, shared_concepts};
