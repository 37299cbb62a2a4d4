use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{CategoryScheme, SimilarityMatrix};
use crate::stats;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConceptScore {
    pub concept_id: String,
    pub category: String,
    /// Mean similarity to the other members of the category.
    pub within: f64,
    /// Mean similarity to every concept outside the category.
    pub between: f64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryAggregate {
    pub category: String,
    pub n: usize,
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryScores {
    pub concepts: Vec<ConceptScore>,
    pub categories: Vec<CategoryAggregate>,
}

impl CategoryScores {
    /// Bar-chart TSV: one row per category with its CI.
    pub fn categories_tsv(&self) -> String {
        let mut out = String::from("category\tn\tmean\tci_low\tci_high\n");
        for c in &self.categories {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                c.category, c.n, c.mean, c.ci_low, c.ci_high
            ));
        }
        out
    }

    pub fn concepts_tsv(&self) -> String {
        let mut out = String::from("concept_id\tcategory\twithin\tbetween\tscore\n");
        for c in &self.concepts {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                c.concept_id, c.category, c.within, c.between, c.score
            ));
        }
        out
    }
}

/// Within-minus-between category scores.
///
/// Only members present in `s` take part. Categories with no member in `s`
/// are skipped; a category with exactly one is an error. "Between" covers
/// every concept in `s` outside the category, categorized or not. Category
/// intervals resample the member scores `b` times.
pub fn within_minus_between(
    s: &SimilarityMatrix,
    cats: &CategoryScheme,
    b: usize,
    seed: u64,
) -> Result<CategoryScores> {
    if b == 0 {
        return Err(Error::argument("bootstrap count must be at least 1"));
    }
    let mut concepts = Vec::new();
    let mut categories = Vec::new();
    for (category, members) in cats.categories() {
        let inside: Vec<usize> = s
            .ids()
            .iter()
            .enumerate()
            .filter(|(_, id)| members.contains(*id))
            .map(|(i, _)| i)
            .collect();
        match inside.len() {
            0 => continue,
            1 => {
                return Err(Error::argument(format!(
                    "category {category} has a single member in the matrix"
                )))
            }
            _ => {}
        }
        let outside: Vec<usize> = (0..s.len()).filter(|i| !inside.contains(i)).collect();
        if outside.is_empty() {
            return Err(Error::argument(format!(
                "category {category} covers every concept; nothing to compare against"
            )));
        }
        let mut scores = Vec::with_capacity(inside.len());
        for &c in &inside {
            let within =
                inside.iter().filter(|&&o| o != c).map(|&o| s.get(c, o)).sum::<f64>() / (inside.len() - 1) as f64;
            let between = outside.iter().map(|&o| s.get(c, o)).sum::<f64>() / outside.len() as f64;
            scores.push(within - between);
            concepts.push(ConceptScore {
                concept_id: s.ids()[c].clone(),
                category: category.clone(),
                within,
                between,
                score: within - between,
            });
        }
        let replicates = stats::bootstrap(scores.len(), b, seed, &format!("category/{category}"), |idx| {
            idx.iter().map(|&i| scores[i]).sum::<f64>() / idx.len() as f64
        });
        let (ci_low, ci_high) = stats::percentile_interval(replicates, stats::DEFAULT_CONFIDENCE);
        categories.push(CategoryAggregate {
            category: category.clone(),
            n: scores.len(),
            mean: stats::mean(&scores),
            ci_low,
            ci_high,
        });
    }
    Ok(CategoryScores { concepts, categories })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::{BTreeMap, BTreeSet};

    fn scheme(cats: &[(&str, &[&str])]) -> CategoryScheme {
        CategoryScheme::new(
            cats.iter()
                .map(|(c, m)| (c.to_string(), m.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>()))
                .collect::<BTreeMap<_, _>>(),
        )
        .unwrap()
    }

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("c{i}")).collect()
    }

    #[test]
    fn block_and_uniform() {
        let mut v = vec![0.0; 16];
        for i in 0..4 {
            for j in 0..4 {
                if i / 2 == j / 2 {
                    v[i * 4 + j] = 1.0;
                }
            }
        }
        let s = SimilarityMatrix::new(ids(4), v).unwrap();
        let cats = scheme(&[("x", &["c0", "c1"]), ("y", &["c2", "c3"])]);
        let out = within_minus_between(&s, &cats, 100, 1).unwrap();
        assert!(out.concepts.iter().all(|c| c.score == 1.0));
        assert!(out
            .categories
            .iter()
            .all(|c| (c.mean, c.ci_low, c.ci_high) == (1.0, 1.0, 1.0)));

        let mut u = vec![0.3; 16];
        for i in 0..4 {
            u[i * 5] = 1.0;
        }
        let s = SimilarityMatrix::new(ids(4), u).unwrap();
        let out = within_minus_between(&s, &cats, 100, 1).unwrap();
        assert!(out.concepts.iter().all(|c| c.score == 0.0));
    }

    #[test]
    fn hand_matrix() {
        #[rustfmt::skip]
        let s = SimilarityMatrix::new(ids(4), vec![
            1.0, 0.8, 0.2, 0.1,
            0.8, 1.0, 0.3, 0.4,
            0.2, 0.3, 1.0, 0.6,
            0.1, 0.4, 0.6, 1.0,
        ]).unwrap();
        let cats = scheme(&[("x", &["c0", "c1"]), ("y", &["c2", "c3"])]);
        let out = within_minus_between(&s, &cats, 200, 3).unwrap();
        let expected = [0.8 - 0.15, 0.8 - 0.35, 0.6 - 0.25, 0.6 - 0.25];
        for (c, e) in out.concepts.iter().zip(expected) {
            assert!((c.score - e).abs() < 1e-12, "{c:?}");
        }
        assert!((out.categories[0].mean - 0.55).abs() < 1e-12);
        for agg in &out.categories {
            assert!(agg.ci_low <= agg.mean + 1e-12 && agg.mean <= agg.ci_high + 1e-12);
        }
    }

    #[test]
    fn singleton_category_is_named() {
        let s = SimilarityMatrix::new(ids(3), vec![1.0, 0.5, 0.5, 0.5, 1.0, 0.5, 0.5, 0.5, 1.0]).unwrap();
        let err = within_minus_between(&s, &scheme(&[("lonely", &["c0", "zz"])]), 10, 1).unwrap_err();
        assert!(err.to_string().contains("lonely"));
        // absent categories are skipped
        let out = within_minus_between(&s, &scheme(&[("gone", &["zz", "yy"])]), 10, 1).unwrap();
        assert!(out.categories.is_empty());
    }
}
