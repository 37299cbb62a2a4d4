use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::io::{read_to_string, write_string};
use crate::model::FeatureNorm;
use crate::{rng, stats};

/// Six-way feature type scheme used for manual labeling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureLabel {
    Taxonomic,
    VisualPerceptual,
    OtherPerceptual,
    Conceptual,
    Functional,
    Encyclopedic,
}

impl FeatureLabel {
    pub const ALL: [FeatureLabel; 6] = [
        FeatureLabel::Taxonomic,
        FeatureLabel::VisualPerceptual,
        FeatureLabel::OtherPerceptual,
        FeatureLabel::Conceptual,
        FeatureLabel::Functional,
        FeatureLabel::Encyclopedic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureLabel::Taxonomic => "taxonomic",
            FeatureLabel::VisualPerceptual => "visual_perceptual",
            FeatureLabel::OtherPerceptual => "other_perceptual",
            FeatureLabel::Conceptual => "conceptual",
            FeatureLabel::Functional => "functional",
            FeatureLabel::Encyclopedic => "encyclopedic",
        }
    }

    /// Accepts the snake-case name; spaces and hyphens may replace the
    /// underscore and case is ignored ("Visual perceptual").
    pub fn parse(s: &str) -> Option<Self> {
        let norm = s.trim().to_lowercase().replace([' ', '-'], "_");
        FeatureLabel::ALL.into_iter().find(|l| l.as_str() == norm)
    }
}

impl fmt::Display for FeatureLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelRecord {
    pub concept_id: String,
    pub feature: String,
    /// Name of the norm the feature was drawn from.
    pub source: String,
    pub label: Option<FeatureLabel>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelSample {
    pub records: Vec<LabelRecord>,
}

const LABEL_HEADER: &str = "concept_id\tfeature\tsource\tlabel";

impl LabelSample {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from(LABEL_HEADER);
        out.push('\n');
        for r in &self.records {
            let label = r.label.map(FeatureLabel::as_str).unwrap_or("");
            out.push_str(&format!("{}\t{}\t{}\t{}\n", r.concept_id, r.feature, r.source, label));
        }
        out
    }
}

/// Parses the labeling TSV. The label column may be empty or missing.
pub fn parse_label_sample(text: &str, source_name: &str) -> Result<LabelSample> {
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() || (i == 0 && line.starts_with("concept_id\t")) {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if !(3..=4).contains(&fields.len()) {
            return Err(Error::parse(
                source_name,
                line_no,
                format!("expected 3 or 4 tab-separated fields, found {}", fields.len()),
            ));
        }
        let label = match fields.get(3).map(|s| s.trim()) {
            None | Some("") => None,
            Some(s) => Some(
                FeatureLabel::parse(s)
                    .ok_or_else(|| Error::parse(source_name, line_no, format!("unknown label {s:?}")))?,
            ),
        };
        records.push(LabelRecord {
            concept_id: fields[0].to_string(),
            feature: fields[1].to_string(),
            source: fields[2].to_string(),
            label,
        });
    }
    Ok(LabelSample { records })
}

pub fn read_label_sample(path: &Path) -> Result<LabelSample> {
    parse_label_sample(&read_to_string(path)?, &path.display().to_string())
}

pub fn write_label_sample(path: &Path, sample: &LabelSample) -> Result<()> {
    write_string(path, &sample.to_tsv())
}

/// Draws `n_per_stratum` entries without replacement from the concepts in
/// `inside`, then as many from the concepts in `outside`. Records come out
/// unlabeled, inside stratum first, each stratum in norm order.
pub fn sample_for_labeling(
    norm: &FeatureNorm,
    source: &str,
    inside: &BTreeSet<String>,
    outside: &BTreeSet<String>,
    n_per_stratum: usize,
    seed: u64,
) -> Result<LabelSample> {
    if n_per_stratum == 0 {
        return Ok(LabelSample::default());
    }
    if let Some(c) = inside.intersection(outside).next() {
        return Err(Error::argument(format!("concept {c} is in both strata")));
    }
    let mut records = Vec::with_capacity(2 * n_per_stratum);
    for (name, stratum) in [("inside", inside), ("outside", outside)] {
        let pool: Vec<_> = norm
            .entries()
            .iter()
            .filter(|e| stratum.contains(&e.concept_id))
            .collect();
        if pool.len() < n_per_stratum {
            return Err(Error::argument(format!(
                "{name} stratum has {} entries, {n_per_stratum} requested",
                pool.len()
            )));
        }
        let mut rng = rng::substream(seed, &format!("labels/{name}"));
        let mut picks = rand::seq::index::sample(&mut rng, pool.len(), n_per_stratum).into_vec();
        picks.sort_unstable();
        records.extend(picks.into_iter().map(|i| LabelRecord {
            concept_id: pool[i].concept_id.clone(),
            feature: pool[i].feature.clone(),
            source: source.to_string(),
            label: None,
        }));
    }
    Ok(LabelSample { records })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabelShare {
    pub label: FeatureLabel,
    pub count: usize,
    pub proportion: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabelDistribution {
    pub n: usize,
    pub bootstrap: usize,
    pub confidence: f64,
    /// One row per label in scheme order, including labels with count 0.
    pub shares: Vec<LabelShare>,
}

impl LabelDistribution {
    /// Bar-chart TSV: `label, count, proportion, ci_low, ci_high`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("label\tcount\tproportion\tci_low\tci_high\n");
        for s in &self.shares {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                s.label, s.count, s.proportion, s.ci_low, s.ci_high
            ));
        }
        out
    }
}

/// Label proportions with percentile bootstrap intervals from `b` resamples
/// of the records.
pub fn label_distribution(sample: &LabelSample, b: usize, seed: u64) -> Result<LabelDistribution> {
    if sample.records.is_empty() {
        return Err(Error::argument("label sample is empty"));
    }
    if b == 0 {
        return Err(Error::argument("bootstrap count must be at least 1"));
    }
    let labels: Vec<usize> = sample
        .records
        .iter()
        .map(|r| {
            r.label
                .map(|l| l as usize)
                .ok_or_else(|| Error::argument(format!("({}, {}) is unlabeled", r.concept_id, r.feature)))
        })
        .collect::<Result<_>>()?;
    let n = labels.len();
    let tally = |idx: &mut dyn Iterator<Item = usize>| {
        let mut counts = [0usize; 6];
        for i in idx {
            counts[labels[i]] += 1;
        }
        counts
    };
    let counts = tally(&mut (0..n));
    let replicates: Vec<[usize; 6]> =
        stats::bootstrap(n, b, seed, "label-distribution", |idx| tally(&mut idx.iter().copied()));
    let shares = FeatureLabel::ALL
        .into_iter()
        .enumerate()
        .map(|(j, label)| {
            let props: Vec<f64> = replicates.iter().map(|c| c[j] as f64 / n as f64).collect();
            let (ci_low, ci_high) = stats::percentile_interval(props, stats::DEFAULT_CONFIDENCE);
            LabelShare {
                label,
                count: counts[j],
                proportion: counts[j] as f64 / n as f64,
                ci_low,
                ci_high,
            }
        })
        .collect();
    Ok(LabelDistribution {
        n,
        bootstrap: b,
        confidence: stats::DEFAULT_CONFIDENCE,
        shares,
    })
}
