use serde::ser::{SerializeMap, SerializeStruct, Serializer};
use serde::Serialize;

use super::regression::rsquared;
use crate::error::{Error, Result};

/// Unique and shared explained-variance components of a regression.
///
/// Subsets are bitmasks over `predictors`; bit `i` is predictor `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct CommonalityDecomposition {
    pub predictors: Vec<String>,
    /// `(subset, R²)` for every nonempty subset, in [`subset_order`] order.
    pub subset_r2: Vec<(u32, f64)>,
    /// `(subset, component)` in the same order.
    pub components: Vec<(u32, f64)>,
    pub r2_full: f64,
}

/// Nonempty subsets of `p` predictors: by size, then by mask.
pub fn subset_order(p: usize) -> Vec<u32> {
    let mut masks: Vec<u32> = (1..1u32 << p).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    masks
}

impl CommonalityDecomposition {
    /// `"A∧B"` for the subset holding predictors A and B.
    pub fn subset_name(&self, mask: u32) -> String {
        self.predictors
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, name)| name.as_str())
            .collect::<Vec<_>>()
            .join("∧")
    }

    pub fn mask_of(&self, names: &[&str]) -> Option<u32> {
        names.iter().try_fold(0u32, |mask, name| {
            let i = self.predictors.iter().position(|p| p == name)?;
            Some(mask | (1 << i))
        })
    }

    pub fn component(&self, names: &[&str]) -> Option<f64> {
        let mask = self.mask_of(names)?;
        self.components.iter().find(|(m, _)| *m == mask).map(|(_, v)| *v)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("decomposition serializes");
        s.push('\n');
        s
    }

    /// Reads the layout written by [`to_json`](Self::to_json).
    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(serde::Deserialize)]
        struct Raw {
            predictors: Vec<String>,
            r2_full: f64,
            components: serde_json::Map<String, serde_json::Value>,
            subset_r2: serde_json::Map<String, serde_json::Value>,
        }
        let raw: Raw =
            serde_json::from_str(text).map_err(|e| Error::parse("decomposition JSON", e.line(), e.to_string()))?;
        let mut out = CommonalityDecomposition {
            predictors: raw.predictors,
            subset_r2: Vec::new(),
            components: Vec::new(),
            r2_full: raw.r2_full,
        };
        let read = |map: &serde_json::Map<String, serde_json::Value>, out: &Self| -> Result<Vec<(u32, f64)>> {
            map.iter()
                .map(|(name, v)| {
                    let names: Vec<&str> = name.split('∧').collect();
                    let mask = out
                        .mask_of(&names)
                        .ok_or_else(|| Error::argument(format!("unknown subset {name}")))?;
                    let value = v
                        .as_f64()
                        .ok_or_else(|| Error::argument(format!("subset {name}: value is not a number")))?;
                    Ok((mask, value))
                })
                .collect()
        };
        out.components = read(&raw.components, &out)?;
        out.subset_r2 = read(&raw.subset_r2, &out)?;
        out.components.sort_by_key(|(m, _)| (m.count_ones(), *m));
        out.subset_r2.sort_by_key(|(m, _)| (m.count_ones(), *m));
        Ok(out)
    }
}

struct NamedValues<'a>(&'a CommonalityDecomposition, &'a [(u32, f64)]);

impl Serialize for NamedValues<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.1.len()))?;
        for (mask, v) in self.1 {
            map.serialize_entry(&self.0.subset_name(*mask), v)?;
        }
        map.end()
    }
}

impl Serialize for CommonalityDecomposition {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("CommonalityDecomposition", 4)?;
        st.serialize_field("predictors", &self.predictors)?;
        st.serialize_field("r2_full", &self.r2_full)?;
        st.serialize_field("components", &NamedValues(self, &self.components))?;
        st.serialize_field("subset_r2", &NamedValues(self, &self.subset_r2))?;
        st.end()
    }
}

/// Solves `a·x = b` by Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("nonempty");
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            let (top, bottom) = a.split_at_mut(row);
            for (x, p) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
                *x -= f * p;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    x
}

/// Partitions R² of `target` on 2 or 3 named predictors into the
/// components of every predictor subset.
///
/// For each nonempty subset S, R²(S) must equal the sum of the components
/// of all subsets T that share a predictor with S; the components solve
/// that square system. Predictors that are exact copies of an earlier one
/// in the same subset are dropped before regressing. Negative components
/// are kept and logged.
pub fn commonality_analysis(target: &[f64], predictors: &[(String, Vec<f64>)]) -> Result<CommonalityDecomposition> {
    let p = predictors.len();
    if !(2..=3).contains(&p) {
        return Err(Error::argument(format!(
            "commonality analysis takes 2 or 3 predictors, got {p}"
        )));
    }
    let mut names = std::collections::BTreeSet::new();
    if let Some((dup, _)) = predictors.iter().find(|(name, _)| !names.insert(name)) {
        return Err(Error::argument(format!("predictor name {dup} repeats")));
    }
    let order = subset_order(p);
    let subset_r2 = order
        .iter()
        .map(|&mask| {
            let mut cols: Vec<&[f64]> = Vec::new();
            for (i, (_, values)) in predictors.iter().enumerate() {
                if mask & (1 << i) != 0 && !cols.contains(&values.as_slice()) {
                    cols.push(values);
                }
            }
            Ok((mask, rsquared(target, &cols)?))
        })
        .collect::<Result<Vec<_>>>()?;

    let a: Vec<Vec<f64>> = order
        .iter()
        .map(|&s| order.iter().map(|&t| if s & t != 0 { 1.0 } else { 0.0 }).collect())
        .collect();
    let b: Vec<f64> = subset_r2.iter().map(|(_, r2)| *r2).collect();
    let values = solve(a, b);
    let full = (1u32 << p) - 1;
    let decomposition = CommonalityDecomposition {
        predictors: predictors.iter().map(|(n, _)| n.clone()).collect(),
        r2_full: subset_r2.iter().find(|(m, _)| *m == full).expect("full subset").1,
        components: order.iter().copied().zip(values).collect(),
        subset_r2,
    };
    for &(mask, v) in &decomposition.components {
        if v < 0.0 {
            log::warn!(
                "negative commonality component {} = {v:.3e}",
                decomposition.subset_name(mask)
            );
        }
    }
    Ok(decomposition)
}
