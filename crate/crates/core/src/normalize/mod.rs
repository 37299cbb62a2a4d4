//! Turns raw completions into a canonical [`FeatureNorm`].
//!
//! Pipeline: split at commas → clean → decompose → synonym collapse →
//! one count per (concept, run). Every stage is deterministic and the result
//! does not depend on the order of the input responses.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::elicitation::RawResponse;
use crate::error::{Error, Result};
use crate::lexicon::{ClosedClassLexicon, SynsetLexicon};
use crate::model::{FeatureNorm, NormEntry, Provenance};

mod decompose;
mod rules;
mod synonyms;

pub use decompose::decompose_feature;
pub use rules::{clean_feature, split_response, CleanOutcome, RemovalReason};
pub use synonyms::{collapse_synonyms, synonym_map};

/// Which features compete when collapsing synonyms.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum CollapseScope {
    /// Counts are pooled over the whole corpus.
    #[default]
    Corpus,
    /// Each concept's features are collapsed on their own.
    Concept,
}

impl CollapseScope {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "corpus" => Some(CollapseScope::Corpus),
            "concept" => Some(CollapseScope::Concept),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NormalizeOptions {
    pub collapse_scope: CollapseScope,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ReportCounts {
    /// Responses that held more than one comma-separated feature.
    pub split: u64,
    pub removed_nonsensical: u64,
    pub removed_single_word: u64,
    pub removed_tautological: u64,
    pub removed_no_pronoun_start: u64,
    pub removed_non_ascii: u64,
    pub removed_question_mark: u64,
    pub qualifier_stripped: u64,
    pub truncated: u64,
    /// Cleaned features that split into two or more features.
    pub decomposed: u64,
    /// Feature occurrences rewritten to a synonym variant.
    pub synonym_replaced: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ReportDenominators {
    pub responses: u64,
    /// Features after splitting.
    pub raw_features: u64,
    /// Features surviving the removal rules.
    pub cleaned_features: u64,
    /// Features after decomposition; the synonym-collapse multiset.
    pub decomposed_features: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ReportPercentages {
    pub split: f64,
    pub removed_nonsensical: f64,
    pub removed_single_word: f64,
    pub removed_tautological: f64,
    pub removed_no_pronoun_start: f64,
    pub removed_non_ascii: f64,
    pub removed_question_mark: f64,
    pub qualifier_stripped: f64,
    pub truncated: f64,
    pub decomposed: f64,
    pub synonym_replaced: f64,
}

/// Per-rule impact of one normalization pass.
///
/// Percentages are `100 × count / denominator`: `split` over responses,
/// removals, qualifier stripping and truncation over raw features,
/// `decomposed` over cleaned features, `synonym_replaced` over decomposed
/// features. A zero denominator gives 0.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct NormalizationReport {
    pub counts: ReportCounts,
    pub denominators: ReportDenominators,
    pub percentages: ReportPercentages,
}

fn pct(count: u64, denominator: u64) -> f64 {
    if denominator == 0 {
        0.0
    } else {
        100.0 * count as f64 / denominator as f64
    }
}

impl NormalizationReport {
    fn from_counts(counts: ReportCounts, denominators: ReportDenominators) -> Self {
        let raw = denominators.raw_features;
        let percentages = ReportPercentages {
            split: pct(counts.split, denominators.responses),
            removed_nonsensical: pct(counts.removed_nonsensical, raw),
            removed_single_word: pct(counts.removed_single_word, raw),
            removed_tautological: pct(counts.removed_tautological, raw),
            removed_no_pronoun_start: pct(counts.removed_no_pronoun_start, raw),
            removed_non_ascii: pct(counts.removed_non_ascii, raw),
            removed_question_mark: pct(counts.removed_question_mark, raw),
            qualifier_stripped: pct(counts.qualifier_stripped, raw),
            truncated: pct(counts.truncated, raw),
            decomposed: pct(counts.decomposed, denominators.cleaned_features),
            synonym_replaced: pct(counts.synonym_replaced, denominators.decomposed_features),
        };
        NormalizationReport {
            counts,
            denominators,
            percentages,
        }
    }

    pub fn removed(&self, reason: RemovalReason) -> u64 {
        let c = &self.counts;
        match reason {
            RemovalReason::Nonsensical => c.removed_nonsensical,
            RemovalReason::SingleWord => c.removed_single_word,
            RemovalReason::Tautological => c.removed_tautological,
            RemovalReason::NoPronounStart => c.removed_no_pronoun_start,
            RemovalReason::NonAscii => c.removed_non_ascii,
            RemovalReason::QuestionMark => c.removed_question_mark,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Per-response stage output, before synonym collapse.
#[derive(Default)]
struct ResponseStages {
    raw: u64,
    removed: BTreeMap<RemovalReason, u64>,
    qualifier_stripped: u64,
    truncated: u64,
    cleaned: u64,
    decomposed: u64,
    features: Vec<String>,
}

fn process_response(completion: &str, closed: &ClosedClassLexicon) -> ResponseStages {
    let mut out = ResponseStages::default();
    for raw in split_response(completion) {
        out.raw += 1;
        match clean_feature(&raw, closed) {
            CleanOutcome::Removed(reason) => *out.removed.entry(reason).or_default() += 1,
            CleanOutcome::Kept {
                text,
                qualifier_stripped,
                truncated,
            } => {
                out.cleaned += 1;
                out.qualifier_stripped += u64::from(qualifier_stripped);
                out.truncated += u64::from(truncated);
                let parts = decompose_feature(&text, closed);
                if parts.len() > 1 {
                    out.decomposed += 1;
                }
                out.features.extend(parts);
            }
        }
    }
    out
}

/// Normalizes a raw corpus into a generated norm.
///
/// The norm's concept list holds every concept in the corpus, including
/// concepts whose features were all removed; `source_count` is the number
/// of distinct runs.
pub fn normalize_corpus(
    responses: &[RawResponse],
    closed: &ClosedClassLexicon,
    synsets: &SynsetLexicon,
    options: &NormalizeOptions,
) -> Result<(FeatureNorm, NormalizationReport)> {
    if responses.is_empty() {
        return Err(Error::argument("corpus is empty"));
    }
    let mut seen = BTreeSet::new();
    for r in responses {
        if !seen.insert((r.concept_id.as_str(), r.run_id)) {
            return Err(Error::argument(format!(
                "corpus has two responses for concept {} in run {}",
                r.concept_id, r.run_id
            )));
        }
    }

    // canonical processing order, independent of input order
    let mut order: Vec<&RawResponse> = responses.iter().collect();
    order.sort_by(|a, b| (&a.concept_id, a.run_id).cmp(&(&b.concept_id, b.run_id)));
    let stages: Vec<ResponseStages> = order
        .par_iter()
        .map(|r| process_response(&r.completion, closed))
        .collect();

    let mut counts = ReportCounts::default();
    let mut denominators = ReportDenominators {
        responses: responses.len() as u64,
        ..Default::default()
    };
    for s in &stages {
        counts.split += u64::from(s.raw > 1);
        denominators.raw_features += s.raw;
        denominators.cleaned_features += s.cleaned;
        denominators.decomposed_features += s.features.len() as u64;
        counts.qualifier_stripped += s.qualifier_stripped;
        counts.truncated += s.truncated;
        counts.decomposed += s.decomposed;
        for (reason, n) in &s.removed {
            let slot = match reason {
                RemovalReason::Nonsensical => &mut counts.removed_nonsensical,
                RemovalReason::SingleWord => &mut counts.removed_single_word,
                RemovalReason::Tautological => &mut counts.removed_tautological,
                RemovalReason::NoPronounStart => &mut counts.removed_no_pronoun_start,
                RemovalReason::NonAscii => &mut counts.removed_non_ascii,
                RemovalReason::QuestionMark => &mut counts.removed_question_mark,
            };
            *slot += n;
        }
    }

    // synonym collapse over the scope's feature counts
    let mut tallies: BTreeMap<Option<&str>, BTreeMap<String, u64>> = BTreeMap::new();
    for (r, s) in order.iter().zip(&stages) {
        let scope = match options.collapse_scope {
            CollapseScope::Corpus => None,
            CollapseScope::Concept => Some(r.concept_id.as_str()),
        };
        let tally = tallies.entry(scope).or_default();
        for f in &s.features {
            *tally.entry(f.clone()).or_default() += 1;
        }
    }
    let maps: BTreeMap<Option<&str>, BTreeMap<String, String>> = tallies
        .iter()
        .map(|(scope, tally)| (*scope, synonym_map(tally, closed, synsets)))
        .collect();

    let mut runs_per_feature: BTreeMap<(&str, String), BTreeSet<u32>> = BTreeMap::new();
    for (r, s) in order.iter().zip(&stages) {
        let scope = match options.collapse_scope {
            CollapseScope::Corpus => None,
            CollapseScope::Concept => Some(r.concept_id.as_str()),
        };
        let map = &maps[&scope];
        for f in &s.features {
            let feature = match map.get(f) {
                Some(to) => {
                    counts.synonym_replaced += 1;
                    to.clone()
                }
                None => f.clone(),
            };
            runs_per_feature
                .entry((r.concept_id.as_str(), feature))
                .or_default()
                .insert(r.run_id);
        }
    }

    let entries = runs_per_feature
        .into_iter()
        .map(|((concept, feature), runs)| NormEntry::new(concept, feature, runs.len() as u32))
        .collect();
    let run_count = responses.iter().map(|r| r.run_id).collect::<BTreeSet<_>>().len() as u32;
    let concepts = responses.iter().map(|r| r.concept_id.clone()).collect();
    let norm = FeatureNorm::with_concepts(entries, run_count, Provenance::Generated, concepts);
    Ok((norm, NormalizationReport::from_counts(counts, denominators)))
}
