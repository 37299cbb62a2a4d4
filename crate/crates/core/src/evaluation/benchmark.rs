use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::model::{Concept, SimilarityMatrix};

use super::correlation::pearson;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchmarkKind {
    Relatedness,
    Similarity,
}

impl BenchmarkKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BenchmarkKind::Relatedness => "relatedness",
            BenchmarkKind::Similarity => "similarity",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkPair {
    pub word_a: String,
    pub word_b: String,
    pub score: f64,
}

/// Human-rated word pairs, at most one record per unordered pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairBenchmark {
    pub kind: BenchmarkKind,
    pairs: Vec<BenchmarkPair>,
}

impl PairBenchmark {
    /// Lowercases the words and merges repeated unordered pairs; a pair
    /// listed twice with different scores is an error.
    pub fn new(kind: BenchmarkKind, pairs: Vec<BenchmarkPair>) -> Result<Self> {
        let mut seen: BTreeMap<(String, String), f64> = BTreeMap::new();
        let mut out = Vec::with_capacity(pairs.len());
        for mut p in pairs {
            if !p.score.is_finite() {
                return Err(Error::argument(format!(
                    "pair ({}, {}) has a non-finite score",
                    p.word_a, p.word_b
                )));
            }
            p.word_a = p.word_a.trim().to_lowercase();
            p.word_b = p.word_b.trim().to_lowercase();
            let key = if p.word_a <= p.word_b {
                (p.word_a.clone(), p.word_b.clone())
            } else {
                (p.word_b.clone(), p.word_a.clone())
            };
            match seen.get(&key) {
                Some(&s) if s == p.score => continue,
                Some(&s) => {
                    return Err(Error::argument(format!(
                        "pair ({}, {}) listed with scores {s} and {}",
                        key.0, key.1, p.score
                    )))
                }
                None => {
                    seen.insert(key, p.score);
                    out.push(p);
                }
            }
        }
        Ok(PairBenchmark { kind, pairs: out })
    }

    pub fn pairs(&self) -> &[BenchmarkPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairCorrelation {
    pub r: f64,
    pub n: usize,
    /// Benchmark words that matched no concept in the matrix.
    pub unresolved: Vec<String>,
}

/// Word → matrix index. A word matches a concept id exactly, or a concept
/// name when exactly one concept in the matrix carries that name.
fn resolver(s: &SimilarityMatrix, concepts: &[Concept]) -> HashMap<String, usize> {
    let mut map: HashMap<String, usize> = HashMap::new();
    let mut by_name: HashMap<String, Vec<usize>> = HashMap::new();
    for c in concepts {
        if let Some(i) = s.index_of(&c.id) {
            by_name.entry(c.name.to_lowercase()).or_default().push(i);
        }
    }
    for (name, idx) in by_name {
        if let [i] = idx[..] {
            map.insert(name, i);
        }
    }
    // ids win over names
    for (i, id) in s.ids().iter().enumerate() {
        map.insert(id.to_lowercase(), i);
    }
    map
}

/// Correlates model similarities with benchmark scores over the pairs whose
/// words both resolve to (distinct) concepts of `s`.
pub fn pair_correlation(s: &SimilarityMatrix, bench: &PairBenchmark, concepts: &[Concept]) -> Result<PairCorrelation> {
    let lookup = resolver(s, concepts);
    let mut unresolved = BTreeSet::new();
    let mut matched: Vec<(f64, f64)> = Vec::new();
    for p in bench.pairs() {
        let a = lookup.get(&p.word_a);
        let b = lookup.get(&p.word_b);
        if a.is_none() {
            unresolved.insert(p.word_a.clone());
        }
        if b.is_none() {
            unresolved.insert(p.word_b.clone());
        }
        if let (Some(&a), Some(&b)) = (a, b) {
            if a != b {
                matched.push((s.get(a, b), p.score));
            }
        }
    }
    for w in &unresolved {
        log::debug!("benchmark word {w:?} matches no concept");
    }
    if matched.len() < 3 {
        return Err(Error::argument(format!(
            "only {} benchmark pairs overlap the concepts; need at least 3",
            matched.len()
        )));
    }
    // a fixed order keeps the result independent of record order
    matched.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    let (model, human): (Vec<f64>, Vec<f64>) = matched.iter().copied().unzip();
    Ok(PairCorrelation {
        r: pearson(&model, &human)?,
        n: matched.len(),
        unresolved: unresolved.into_iter().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(a: &str, b: &str, score: f64) -> BenchmarkPair {
        BenchmarkPair {
            word_a: a.into(),
            word_b: b.into(),
            score,
        }
    }

    fn matrix() -> SimilarityMatrix {
        #[rustfmt::skip]
        let v = vec![
            1.0, 0.9, 0.2, 0.4,
            0.9, 1.0, 0.3, 0.1,
            0.2, 0.3, 1.0, 0.6,
            0.4, 0.1, 0.6, 1.0,
        ];
        SimilarityMatrix::new(vec!["cat".into(), "dog".into(), "bat1".into(), "bat2".into()], v).unwrap()
    }

    fn concepts() -> Vec<Concept> {
        vec![
            Concept::new("cat", "cat").unwrap(),
            Concept::new("dog", "dog").unwrap(),
            Concept::new("bat1", "bat").unwrap().with_disambiguator("animal"),
            Concept::new("bat2", "bat").unwrap().with_disambiguator("sports item"),
        ]
    }

    #[test]
    fn exact_scores_correlate_perfectly() {
        let bench = PairBenchmark::new(
            BenchmarkKind::Similarity,
            vec![
                pair("Cat", "dog", 0.9),
                pair("cat", "bat1", 0.2),
                pair("dog", "bat2", 0.1),
                pair("bat1", "bat2", 0.6),
            ],
        )
        .unwrap();
        let c = pair_correlation(&matrix(), &bench, &concepts()).unwrap();
        assert!((c.r - 1.0).abs() < 1e-12);
        assert_eq!(c.n, 4);
    }

    #[test]
    fn ambiguous_names_do_not_match() {
        let bench = PairBenchmark::new(
            BenchmarkKind::Relatedness,
            vec![
                pair("cat", "dog", 9.0),
                pair("cat", "bat", 3.0),
                pair("dog", "bat2", 1.0),
                pair("cat", "bat2", 4.0),
            ],
        )
        .unwrap();
        let c = pair_correlation(&matrix(), &bench, &concepts()).unwrap();
        assert_eq!(c.n, 3);
        assert_eq!(c.unresolved, vec!["bat".to_string()]);
        let few = PairBenchmark::new(BenchmarkKind::Relatedness, vec![pair("cat", "dog", 1.0)]).unwrap();
        assert!(pair_correlation(&matrix(), &few, &concepts()).is_err());
    }

    #[test]
    fn duplicate_pairs() {
        let b = PairBenchmark::new(
            BenchmarkKind::Similarity,
            vec![pair("a", "b", 1.0), pair("b", "a", 1.0)],
        )
        .unwrap();
        assert_eq!(b.len(), 1);
        assert!(PairBenchmark::new(
            BenchmarkKind::Similarity,
            vec![pair("a", "b", 1.0), pair("B", "a", 2.0)]
        )
        .is_err());
    }
}
