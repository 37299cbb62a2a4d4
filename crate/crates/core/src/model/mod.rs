//! Data types shared by every pipeline stage.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::lexicon::ClosedClassLexicon;

pub mod io;
mod matrix;

pub use matrix::{ConceptFeatureMatrix, SimilarityMatrix};

/// A nameable object concept.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Concept {
    pub id: String,
    pub name: String,
    /// Superordinate category used to tell homonyms apart ("bat (animal)").
    pub disambiguator: Option<String>,
    pub categories: BTreeSet<String>,
}

impl Concept {
    pub fn new(id: impl Into<String>, name: impl Into<String>) -> Result<Self> {
        let id = id.into();
        let name = name.into();
        if id.trim().is_empty() {
            return Err(Error::argument("concept id must be nonempty"));
        }
        if name.trim().is_empty() {
            return Err(Error::argument(format!("concept {id}: name must be nonempty")));
        }
        if name.contains(',') {
            return Err(Error::argument(format!("concept {id}: name contains a comma")));
        }
        if name != name.to_lowercase() {
            return Err(Error::argument(format!("concept {id}: name must be lowercase")));
        }
        Ok(Concept {
            id,
            name,
            disambiguator: None,
            categories: BTreeSet::new(),
        })
    }

    pub fn with_disambiguator(mut self, disambiguator: impl Into<String>) -> Self {
        let d = disambiguator.into();
        self.disambiguator = if d.trim().is_empty() { None } else { Some(d) };
        self
    }

    pub fn with_categories<I, S>(mut self, categories: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.categories = categories.into_iter().map(Into::into).collect();
        self
    }

    /// The name as shown to the completion model: `name (disambiguator)`.
    pub fn display_name(&self) -> String {
        match &self.disambiguator {
            Some(d) => format!("{} ({})", self.name, d),
            None => self.name.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Provenance {
    Human,
    Generated,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Human => "human",
            Provenance::Generated => "generated",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "human" => Some(Provenance::Human),
            "generated" => Some(Provenance::Generated),
            _ => None,
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NormEntry {
    pub concept_id: String,
    pub feature: String,
    /// Number of distinct sources (runs or participants) producing the feature.
    pub frequency: u32,
}

impl NormEntry {
    pub fn new(concept_id: impl Into<String>, feature: impl Into<String>, frequency: u32) -> Self {
        NormEntry {
            concept_id: concept_id.into(),
            feature: feature.into(),
            frequency,
        }
    }
}

/// A feature norm: concept/feature production frequencies plus the number of
/// sources they were counted over.
///
/// Entries are kept sorted, so two norms built from the same entries in any
/// order compare equal. Construction does not reject invalid data; use
/// [`validate_norm`] to list invariant violations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureNorm {
    entries: Vec<NormEntry>,
    source_count: u32,
    provenance: Provenance,
    concepts: BTreeSet<String>,
}

impl FeatureNorm {
    /// Builds a norm whose concept list is the set of concepts with entries.
    pub fn new(entries: Vec<NormEntry>, source_count: u32, provenance: Provenance) -> Self {
        let concepts = entries.iter().map(|e| e.concept_id.clone()).collect();
        Self::with_concepts(entries, source_count, provenance, concepts)
    }

    pub fn with_concepts(
        mut entries: Vec<NormEntry>,
        source_count: u32,
        provenance: Provenance,
        concepts: BTreeSet<String>,
    ) -> Self {
        entries.sort();
        FeatureNorm {
            entries,
            source_count,
            provenance,
            concepts,
        }
    }

    pub fn entries(&self) -> &[NormEntry] {
        &self.entries
    }

    pub fn source_count(&self) -> u32 {
        self.source_count
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn concepts(&self) -> &BTreeSet<String> {
        &self.concepts
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries of one concept (a contiguous run, since entries are sorted).
    pub fn entries_for(&self, concept_id: &str) -> &[NormEntry] {
        let start = self.entries.partition_point(|e| e.concept_id.as_str() < concept_id);
        let end = self.entries.partition_point(|e| e.concept_id.as_str() <= concept_id);
        &self.entries[start..end]
    }

    /// Concepts in the concept list that have no entries.
    pub fn empty_concepts(&self) -> Vec<String> {
        let with_entries: HashSet<&str> = self.entries.iter().map(|e| e.concept_id.as_str()).collect();
        self.concepts
            .iter()
            .filter(|c| !with_entries.contains(c.as_str()))
            .cloned()
            .collect()
    }

    /// Same norm with `entries` replaced; concept list, source count and
    /// provenance are kept.
    pub fn replace_entries(&self, entries: Vec<NormEntry>) -> Self {
        Self::with_concepts(entries, self.source_count, self.provenance, self.concepts.clone())
    }
}

/// One broken invariant found by [`validate_norm`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    ZeroSourceCount,
    FrequencyOutOfRange {
        concept_id: String,
        feature: String,
        frequency: u32,
        source_count: u32,
    },
    DuplicateEntry {
        concept_id: String,
        feature: String,
    },
    UnknownConcept {
        concept_id: String,
        feature: String,
    },
    NonCanonicalFeature {
        concept_id: String,
        feature: String,
        rule: &'static str,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ZeroSourceCount => write!(f, "source_count must be at least 1"),
            Violation::FrequencyOutOfRange {
                concept_id,
                feature,
                frequency,
                source_count,
            } => write!(
                f,
                "({concept_id}, {feature}): frequency {frequency} outside [1, {source_count}]"
            ),
            Violation::DuplicateEntry { concept_id, feature } => {
                write!(f, "({concept_id}, {feature}): duplicate entry")
            }
            Violation::UnknownConcept { concept_id, feature } => {
                write!(f, "({concept_id}, {feature}): concept not in concept list")
            }
            Violation::NonCanonicalFeature {
                concept_id,
                feature,
                rule,
            } => write!(f, "({concept_id}, {feature}): not canonical ({rule})"),
        }
    }
}

/// Checks a feature string against the canonical-feature invariants and
/// returns the first rule it breaks.
pub fn canonical_violation(feature: &str, lex: &ClosedClassLexicon) -> Option<&'static str> {
    if feature.trim().is_empty() {
        return Some("empty");
    }
    if feature.contains(',') {
        return Some("contains a comma");
    }
    if feature.contains('?') {
        return Some("contains a question mark");
    }
    if !feature.is_ascii() {
        return Some("not 7-bit clean");
    }
    let mut tokens = feature.split_whitespace();
    let first = tokens.next().unwrap_or_default();
    if !lex.pronouns.contains(first) {
        return Some("does not begin with a pronoun");
    }
    if tokens.next().is_none() {
        return Some("single token");
    }
    None
}

/// Validates a norm against the bundled closed-class lexicon.
pub fn validate_norm(norm: &FeatureNorm) -> Vec<Violation> {
    validate_norm_with(norm, ClosedClassLexicon::bundled())
}

/// Lists every invariant violation in `norm`. Canonical-feature rules apply to
/// generated norms only; human norms keep their own feature phrasing.
pub fn validate_norm_with(norm: &FeatureNorm, lex: &ClosedClassLexicon) -> Vec<Violation> {
    let mut report = Vec::new();
    if norm.source_count == 0 {
        report.push(Violation::ZeroSourceCount);
    }
    let mut seen: BTreeMap<(&str, &str), usize> = BTreeMap::new();
    for e in &norm.entries {
        if e.frequency == 0 || e.frequency > norm.source_count {
            report.push(Violation::FrequencyOutOfRange {
                concept_id: e.concept_id.clone(),
                feature: e.feature.clone(),
                frequency: e.frequency,
                source_count: norm.source_count,
            });
        }
        if !norm.concepts.contains(&e.concept_id) {
            report.push(Violation::UnknownConcept {
                concept_id: e.concept_id.clone(),
                feature: e.feature.clone(),
            });
        }
        if norm.provenance == Provenance::Generated {
            if let Some(rule) = canonical_violation(&e.feature, lex) {
                report.push(Violation::NonCanonicalFeature {
                    concept_id: e.concept_id.clone(),
                    feature: e.feature.clone(),
                    rule,
                });
            }
        }
        *seen.entry((&e.concept_id, &e.feature)).or_default() += 1;
    }
    for ((concept_id, feature), n) in seen {
        if n > 1 {
            report.push(Violation::DuplicateEntry {
                concept_id: concept_id.to_string(),
                feature: feature.to_string(),
            });
        }
    }
    report
}

/// Category id → member concept ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CategoryScheme {
    categories: BTreeMap<String, BTreeSet<String>>,
}

impl CategoryScheme {
    /// Builds a scheme for the within/between analysis. Fails if a concept is
    /// listed in more than one category.
    pub fn new(categories: BTreeMap<String, BTreeSet<String>>) -> Result<Self> {
        let mut owner: BTreeMap<&str, &str> = BTreeMap::new();
        for (cat, members) in &categories {
            for m in members {
                if let Some(prev) = owner.insert(m, cat) {
                    return Err(Error::argument(format!("concept {m} belongs to both {prev} and {cat}")));
                }
            }
        }
        Ok(CategoryScheme { categories })
    }

    /// Derives the scheme from the concepts' category sets.
    pub fn from_concepts(concepts: &[Concept]) -> Result<Self> {
        let mut categories: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for c in concepts {
            for cat in &c.categories {
                categories.entry(cat.clone()).or_default().insert(c.id.clone());
            }
        }
        Self::new(categories)
    }

    /// Checks that every member is a known concept.
    pub fn check_members(&self, known: &BTreeSet<String>) -> Result<()> {
        for (cat, members) in &self.categories {
            if let Some(m) = members.iter().find(|m| !known.contains(*m)) {
                return Err(Error::argument(format!(
                    "category {cat} references unknown concept {m}"
                )));
            }
        }
        Ok(())
    }

    pub fn categories(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.categories
    }

    pub fn category_of(&self, concept_id: &str) -> Option<&str> {
        self.categories
            .iter()
            .find(|(_, m)| m.contains(concept_id))
            .map(|(c, _)| c.as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norm(entries: Vec<NormEntry>, source_count: u32) -> FeatureNorm {
        FeatureNorm::new(entries, source_count, Provenance::Generated)
    }

    #[test]
    fn valid_norm_has_empty_report() {
        let n = norm(
            vec![
                NormEntry::new("c1", "it is red", 1),
                NormEntry::new("c1", "it has legs", 30),
                NormEntry::new("c2", "it is red", 12),
            ],
            30,
        );
        assert!(validate_norm(&n).is_empty());
    }

    #[test]
    fn frequency_above_source_count() {
        let n = norm(vec![NormEntry::new("c1", "it is red", 31)], 30);
        let report = validate_norm(&n);
        assert_eq!(report.len(), 1);
        assert!(matches!(
            report[0],
            Violation::FrequencyOutOfRange { frequency: 31, .. }
        ));
    }

    #[test]
    fn duplicate_pair_is_named() {
        let n = norm(
            vec![
                NormEntry::new("c1", "it is red", 2),
                NormEntry::new("c1", "it is red", 3),
                NormEntry::new("c1", "it is big", 3),
            ],
            30,
        );
        assert_eq!(
            validate_norm(&n),
            vec![Violation::DuplicateEntry {
                concept_id: "c1".into(),
                feature: "it is red".into()
            }]
        );
    }

    #[test]
    fn unknown_concept_and_non_canonical() {
        let n = FeatureNorm::with_concepts(
            vec![NormEntry::new("c9", "green color", 1)],
            1,
            Provenance::Generated,
            BTreeSet::from(["c1".to_string()]),
        );
        let report = validate_norm(&n);
        assert_eq!(report.len(), 2);
        let human = FeatureNorm::new(vec![NormEntry::new("c1", "is_green", 1)], 1, Provenance::Human);
        assert!(validate_norm(&human).is_empty());
    }

    #[test]
    fn entries_for_concept() {
        let n = norm(
            vec![
                NormEntry::new("b", "it is x", 1),
                NormEntry::new("a", "it is y", 1),
                NormEntry::new("b", "it is z", 1),
            ],
            1,
        );
        assert_eq!(n.entries_for("b").len(), 2);
        assert_eq!(n.entries_for("a").len(), 1);
        assert!(n.entries_for("c").is_empty());
    }

    #[test]
    fn concept_validation() {
        assert!(Concept::new("c1", "chair").is_ok());
        assert!(Concept::new("c1", "").is_err());
        assert!(Concept::new("c1", "a, b").is_err());
        assert!(Concept::new("c1", "Chair").is_err());
        let bat = Concept::new("bat1", "bat").unwrap().with_disambiguator("animal");
        assert_eq!(bat.display_name(), "bat (animal)");
    }

    #[test]
    fn category_scheme_rejects_double_membership() {
        let a = Concept::new("a", "a").unwrap().with_categories(["x", "y"]);
        assert!(CategoryScheme::from_concepts(&[a]).is_err());
        let b = Concept::new("b", "b").unwrap().with_categories(["x"]);
        let s = CategoryScheme::from_concepts(&[b]).unwrap();
        assert_eq!(s.category_of("b"), Some("x"));
        assert!(s.check_members(&BTreeSet::new()).is_err());
    }
}
