use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{ConceptFeatureMatrix, FeatureNorm, SimilarityMatrix};

/// Cosine of two dense vectors. Zero vectors give NaN.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "vectors differ in length");
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

fn sparse_dot(a: &[(usize, u32)], b: &[(usize, u32)]) -> f64 {
    let (mut i, mut j, mut acc) = (0, 0, 0.0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                acc += f64::from(a[i].1) * f64::from(b[j].1);
                i += 1;
                j += 1;
            }
        }
    }
    acc
}

/// Pairwise cosine similarity of the matrix rows.
///
/// The diagonal is exactly 1. Counts are nonnegative, so every value lies
/// in [0, 1]; rounding overshoot is clamped.
pub fn cosine_similarity_matrix(m: &ConceptFeatureMatrix) -> Result<SimilarityMatrix> {
    let n = m.n_rows();
    if let Some(i) = (0..n).find(|&i| m.row(i).is_empty()) {
        return Err(Error::argument(format!(
            "concept {} has an all-zero feature vector",
            m.concepts()[i]
        )));
    }
    let sq_norms: Vec<f64> = (0..n).map(|i| sparse_dot(m.row(i), m.row(i))).collect();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i + 1..n)
                .map(|j| {
                    // one square root keeps identical rows at exactly 1
                    let denom = (sq_norms[i] * sq_norms[j]).sqrt();
                    (sparse_dot(m.row(i), m.row(j)) / denom).clamp(0.0, 1.0)
                })
                .collect()
        })
        .collect();
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        values[i * n + i] = 1.0;
        for (offset, &v) in upper[i].iter().enumerate() {
            let j = i + 1 + offset;
            values[i * n + j] = v;
            values[j * n + i] = v;
        }
    }
    SimilarityMatrix::new(m.concepts().to_vec(), values)
}

/// Sorted ids of the concepts listed in every norm.
pub fn shared_concepts(norms: &[&FeatureNorm]) -> Result<Vec<String>> {
    if norms.len() < 2 {
        return Err(Error::argument("shared_concepts needs at least two norms"));
    }
    let mut shared: BTreeSet<String> = norms[0].concepts().clone();
    for n in &norms[1..] {
        shared.retain(|c| n.concepts().contains(c));
    }
    Ok(shared.into_iter().collect())
}
