//! Benchmark correlations and variance partitioning.

mod benchmark;
mod commonality;
mod correlation;
mod regression;

pub use benchmark::{pair_correlation, BenchmarkKind, BenchmarkPair, PairBenchmark, PairCorrelation};
pub use commonality::{commonality_analysis, CommonalityDecomposition};
pub use correlation::{matrix_correlation, pearson};
pub use regression::rsquared;
