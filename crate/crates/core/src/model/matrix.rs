use crate::error::{Error, Result};

/// Sparse concepts × features count matrix.
///
/// Rows hold `(column, count)` pairs sorted by column with no zero counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConceptFeatureMatrix {
    concepts: Vec<String>,
    features: Vec<String>,
    rows: Vec<Vec<(usize, u32)>>,
}

impl ConceptFeatureMatrix {
    pub fn new(concepts: Vec<String>, features: Vec<String>, mut rows: Vec<Vec<(usize, u32)>>) -> Result<Self> {
        if rows.len() != concepts.len() {
            return Err(Error::argument(format!(
                "{} rows for {} concepts",
                rows.len(),
                concepts.len()
            )));
        }
        for (row, id) in rows.iter_mut().zip(&concepts) {
            row.retain(|&(_, v)| v > 0);
            row.sort_unstable_by_key(|&(c, _)| c);
            if row.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::argument(format!("row {id} repeats a column")));
            }
            if row.iter().any(|&(c, _)| c >= features.len()) {
                return Err(Error::argument(format!("row {id} has a column out of range")));
            }
        }
        Ok(ConceptFeatureMatrix {
            concepts,
            features,
            rows,
        })
    }

    pub fn concepts(&self) -> &[String] {
        &self.concepts
    }

    pub fn features(&self) -> &[String] {
        &self.features
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.features.len()
    }

    pub fn row(&self, i: usize) -> &[(usize, u32)] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.rows[i]
            .binary_search_by_key(&j, |&(c, _)| c)
            .map(|k| self.rows[i][k].1)
            .unwrap_or(0)
    }

    pub fn to_dense(&self) -> Vec<Vec<u32>> {
        self.rows
            .iter()
            .map(|row| {
                let mut dense = vec![0; self.features.len()];
                for &(c, v) in row {
                    dense[c] = v;
                }
                dense
            })
            .collect()
    }
}

/// Square, symmetric matrix of pairwise concept similarities.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    ids: Vec<String>,
    values: Vec<f64>,
}

const SYMMETRY_TOL: f64 = 1e-12;

impl SimilarityMatrix {
    /// `values` is row-major, `ids.len()²` long, finite and symmetric.
    pub fn new(ids: Vec<String>, values: Vec<f64>) -> Result<Self> {
        let n = ids.len();
        if values.len() != n * n {
            return Err(Error::argument(format!("{} values for a {n}x{n} matrix", values.len())));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::argument(format!(
                "non-finite similarity at ({}, {})",
                ids[pos / n],
                ids[pos % n]
            )));
        }
        for i in 0..n {
            for j in 0..i {
                let (a, b) = (values[i * n + j], values[j * n + i]);
                if (a - b).abs() > SYMMETRY_TOL * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::argument(format!(
                        "matrix not symmetric at ({}, {})",
                        ids[i], ids[j]
                    )));
                }
            }
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = ids.iter().find(|id| !seen.insert(id.as_str())) {
            return Err(Error::argument(format!("duplicate concept id {dup}")));
        }
        Ok(SimilarityMatrix { ids, values })
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ids.len() + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    /// Strictly-lower-triangular entries in row-major order.
    pub fn lower_triangle(&self) -> Vec<f64> {
        let n = self.ids.len();
        let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 1..n {
            for j in 0..i {
                out.push(self.values[i * n + j]);
            }
        }
        out
    }

    /// Restriction to `ids`, in the given order.
    pub fn subset(&self, ids: &[String]) -> Result<Self> {
        let idx = ids
            .iter()
            .map(|id| {
                self.index_of(id)
                    .ok_or_else(|| Error::argument(format!("concept {id} not in matrix")))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut values = Vec::with_capacity(idx.len() * idx.len());
        for &i in &idx {
            for &j in &idx {
                values.push(self.get(i, j));
            }
        }
        Self::new(ids.to_vec(), values)
    }
}
