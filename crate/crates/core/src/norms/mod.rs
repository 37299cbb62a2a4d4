//! Frequency filtering, elbow selection, descriptive statistics and matrix
//! construction.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ConceptFeatureMatrix, FeatureNorm};

mod labels;

pub use labels::{
    label_distribution, parse_label_sample, read_label_sample, sample_for_labeling, write_label_sample, FeatureLabel,
    LabelDistribution, LabelRecord, LabelSample, LabelShare,
};

/// Minimum per-concept production frequency a feature needs to be kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FilterConfig {
    k: u32,
}

impl FilterConfig {
    pub fn new(k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::argument("k must be at least 1"));
        }
        Ok(FilterConfig { k })
    }

    pub fn k(&self) -> u32 {
        self.k
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilterOutcome {
    pub norm: FeatureNorm,
    /// Concepts that had entries before filtering and have none after.
    pub emptied_concepts: Vec<String>,
}

/// Drops entries with frequency below `k`. The concept list and source count
/// are kept, so emptied concepts stay in the norm.
pub fn filter_infrequent(norm: &FeatureNorm, cfg: FilterConfig) -> FilterOutcome {
    let kept: Vec<_> = norm
        .entries()
        .iter()
        .filter(|e| e.frequency >= cfg.k)
        .cloned()
        .collect();
    let before: BTreeSet<&str> = norm.entries().iter().map(|e| e.concept_id.as_str()).collect();
    let after: BTreeSet<&str> = kept.iter().map(|e| e.concept_id.as_str()).collect();
    let emptied_concepts = before.difference(&after).map(|c| c.to_string()).collect();
    FilterOutcome {
        norm: norm.replace_entries(kept),
        emptied_concepts,
    }
}

/// Number of unique features left after filtering at each k in `1..=k_max`.
pub fn unique_feature_curve(norm: &FeatureNorm, k_max: u32) -> Result<Vec<(u32, usize)>> {
    if k_max < 2 {
        return Err(Error::argument("k_max must be at least 2"));
    }
    // a feature survives at k iff its largest frequency over concepts is ≥ k
    let mut peak: BTreeMap<&str, u32> = BTreeMap::new();
    for e in norm.entries() {
        let p = peak.entry(e.feature.as_str()).or_default();
        *p = (*p).max(e.frequency);
    }
    let mut survivors = vec![0usize; k_max as usize + 1];
    for &p in peak.values() {
        for slot in survivors.iter_mut().take(p.min(k_max) as usize + 1).skip(1) {
            *slot += 1;
        }
    }
    Ok((1..=k_max).map(|k| (k, survivors[k as usize])).collect())
}

const ELBOW_TIE: f64 = 1e-12;

/// Elbow of a filtering curve: the interior point farthest from the chord
/// between the end points, with both axes min-max scaled to [0, 1].
/// Ties go to the smallest k.
pub fn elbow_point(curve: &[(u32, usize)]) -> Result<u32> {
    if curve.len() < 3 {
        return Err(Error::argument("elbow needs at least 3 curve points"));
    }
    if curve.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(Error::argument("curve k values must be strictly increasing"));
    }
    let scale = |v: f64, lo: f64, hi: f64| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 };
    let (k_lo, k_hi) = (curve[0].0 as f64, curve[curve.len() - 1].0 as f64);
    let y_lo = curve.iter().map(|p| p.1).min().unwrap() as f64;
    let y_hi = curve.iter().map(|p| p.1).max().unwrap() as f64;
    let points: Vec<(f64, f64)> = curve
        .iter()
        .map(|&(k, y)| (scale(k as f64, k_lo, k_hi), scale(y as f64, y_lo, y_hi)))
        .collect();
    let (x0, y0) = points[0];
    let (x1, y1) = points[points.len() - 1];
    let (dx, dy) = (x1 - x0, y1 - y0);
    let chord = dx.hypot(dy);
    let mut best: Option<(u32, f64)> = None;
    for (i, &(x, y)) in points.iter().enumerate().take(points.len() - 1).skip(1) {
        let d = (dy * (x - x0) - dx * (y - y0)).abs() / chord;
        match best {
            Some((_, bd)) if d <= bd + ELBOW_TIE => {}
            _ => best = Some((curve[i].0, d)),
        }
    }
    Ok(best.expect("curve has an interior point").0)
}

/// Size statistics of a norm, as reported for human and generated norms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DescriptiveStats {
    pub n_concepts: usize,
    /// Number of (concept, feature) entries.
    pub total_features: usize,
    /// Number of distinct feature texts.
    pub n_unique_features: usize,
    pub features_per_concept: f64,
    /// `n_unique_features / total_features`, in (0, 1].
    pub unique_share: f64,
}

impl DescriptiveStats {
    pub fn from_counts(n_concepts: usize, total_features: usize, n_unique_features: usize) -> Result<Self> {
        if n_concepts == 0 || total_features == 0 {
            return Err(Error::argument("statistics need at least one concept and one entry"));
        }
        if n_unique_features == 0 || n_unique_features > total_features {
            return Err(Error::argument(format!(
                "{n_unique_features} unique features for {total_features} entries"
            )));
        }
        Ok(DescriptiveStats {
            n_concepts,
            total_features,
            n_unique_features,
            features_per_concept: total_features as f64 / n_concepts as f64,
            unique_share: n_unique_features as f64 / total_features as f64,
        })
    }

    pub fn unique_share_percent(&self) -> f64 {
        100.0 * self.unique_share
    }
}

/// Counts over the norm's whole concept list, including concepts without
/// entries.
pub fn descriptive_stats(norm: &FeatureNorm) -> Result<DescriptiveStats> {
    if norm.is_empty() {
        return Err(Error::argument("norm has no entries"));
    }
    let unique: HashSet<&str> = norm.entries().iter().map(|e| e.feature.as_str()).collect();
    DescriptiveStats::from_counts(norm.concepts().len(), norm.entries().len(), unique.len())
}

/// Concept × feature matrix over `concepts` (in the given order); columns are
/// the features of those concepts, sorted.
pub fn build_matrix(norm: &FeatureNorm, concepts: &[String]) -> Result<ConceptFeatureMatrix> {
    let mut seen = BTreeSet::new();
    for c in concepts {
        if !seen.insert(c) {
            return Err(Error::argument(format!("concept {c} listed twice")));
        }
        if !norm.concepts().contains(c) {
            return Err(Error::argument(format!("concept {c} is not in the norm")));
        }
        if norm.entries_for(c).is_empty() {
            return Err(Error::argument(format!("concept {c} has no entries")));
        }
    }
    let features: BTreeSet<&str> = concepts
        .iter()
        .flat_map(|c| norm.entries_for(c).iter().map(|e| e.feature.as_str()))
        .collect();
    let column: BTreeMap<&str, usize> = features.iter().enumerate().map(|(i, f)| (*f, i)).collect();
    let rows = concepts
        .iter()
        .map(|c| {
            norm.entries_for(c)
                .iter()
                .map(|e| (column[e.feature.as_str()], e.frequency))
                .collect()
        })
        .collect();
    ConceptFeatureMatrix::new(
        concepts.to_vec(),
        features.into_iter().map(str::to_string).collect(),
        rows,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{NormEntry, Provenance};

    fn norm(entries: &[(&str, &str, u32)], sources: u32) -> FeatureNorm {
        FeatureNorm::new(
            entries.iter().map(|&(c, f, n)| NormEntry::new(c, f, n)).collect(),
            sources,
            Provenance::Generated,
        )
    }

    #[test]
    fn filtering() {
        let n = norm(&[("x", "it is f", 3), ("x", "it is g", 5), ("y", "it is f", 2)], 5);
        let out = filter_infrequent(&n, FilterConfig::new(4).unwrap());
        assert_eq!(out.norm.entries(), &[NormEntry::new("x", "it is g", 5)]);
        assert_eq!(out.emptied_concepts, vec!["y".to_string()]);
        assert_eq!(out.norm.source_count(), 5);
        assert_eq!(out.norm.concepts().len(), 2);
        assert_eq!(filter_infrequent(&n, FilterConfig::new(1).unwrap()).norm, n);
        assert!(FilterConfig::new(0).is_err());
    }

    #[test]
    fn curve_matches_refiltering() {
        let n = norm(
            &[
                ("a", "it is f", 1),
                ("a", "it is g", 4),
                ("b", "it is f", 3),
                ("b", "it is h", 2),
                ("c", "it is g", 1),
            ],
            5,
        );
        let curve = unique_feature_curve(&n, 6).unwrap();
        for &(k, count) in &curve {
            let filtered = filter_infrequent(&n, FilterConfig::new(k).unwrap()).norm;
            let unique: BTreeSet<_> = filtered.entries().iter().map(|e| &e.feature).collect();
            assert_eq!(count, unique.len(), "k={k}");
        }
        assert_eq!(curve, vec![(1, 3), (2, 3), (3, 2), (4, 1), (5, 0), (6, 0)]);
        assert!(unique_feature_curve(&n, 1).is_err());
    }

    #[test]
    fn constant_frequencies_step_once() {
        let n = norm(&[("a", "it is f", 3), ("b", "it is g", 3)], 5);
        let curve = unique_feature_curve(&n, 5).unwrap();
        assert_eq!(curve, vec![(1, 2), (2, 2), (3, 2), (4, 0), (5, 0)]);
    }

    #[test]
    fn elbow() {
        let line: Vec<(u32, usize)> = (1..=5).map(|k| (k, 100 - 10 * k as usize)).collect();
        assert_eq!(elbow_point(&line).unwrap(), 2);
        let curve = [
            (1, 10000),
            (2, 4000),
            (3, 2000),
            (4, 1500),
            (5, 1300),
            (6, 1200),
            (7, 1150),
        ];
        assert_eq!(elbow_point(&curve).unwrap(), 3);
        assert!(elbow_point(&curve[..2]).is_err());
    }

    #[test]
    fn stats() {
        let s = descriptive_stats(&norm(
            &[("c1", "it is f1", 1), ("c1", "it is f2", 1), ("c2", "it is f2", 1)],
            1,
        ))
        .unwrap();
        assert_eq!((s.n_concepts, s.total_features, s.n_unique_features), (2, 3, 2));
        assert_eq!(s.features_per_concept, 1.5);
        assert!((s.unique_share_percent() - 66.666_666_666_666_67).abs() < 1e-9);
        let one = descriptive_stats(&norm(&[("c", "it is f", 1)], 1)).unwrap();
        assert_eq!((one.features_per_concept, one.unique_share), (1.0, 1.0));
        assert!(descriptive_stats(&norm(&[], 1)).is_err());
    }

    #[test]
    fn matrix() {
        let n = norm(
            &[
                ("a", "it is f", 2),
                ("a", "it is g", 1),
                ("b", "it is h", 3),
                ("b", "it is f", 1),
            ],
            3,
        );
        let m = build_matrix(&n, &["b".into(), "a".into()]).unwrap();
        assert_eq!(m.features(), &["it is f", "it is g", "it is h"]);
        assert_eq!(m.to_dense(), vec![vec![1, 0, 3], vec![2, 1, 0]]);
        let single = build_matrix(&n, &["a".into()]).unwrap();
        assert_eq!(single.to_dense(), vec![vec![2, 1]]);
        assert!(build_matrix(&n, &["z".into()]).is_err());
    }
}
