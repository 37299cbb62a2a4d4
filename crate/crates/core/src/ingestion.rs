//! Readers for external data: human norms, concept lists and word-pair
//! benchmarks.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::evaluation::{BenchmarkKind, BenchmarkPair, PairBenchmark};
use crate::model::{Concept, FeatureNorm, NormEntry, Provenance};

/// Field separator of a delimited file.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Delimiter {
    /// Tab if the first line has one, else comma if it has one, else runs
    /// of whitespace.
    #[default]
    Auto,
    Tab,
    Comma,
    Whitespace,
}

impl Delimiter {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "auto" => Some(Delimiter::Auto),
            "tab" | "\\t" => Some(Delimiter::Tab),
            "comma" | "," => Some(Delimiter::Comma),
            "space" | "whitespace" => Some(Delimiter::Whitespace),
            _ => None,
        }
    }

    fn resolve(self, text: &str) -> Delimiter {
        if self != Delimiter::Auto {
            return self;
        }
        let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
        if first.contains('\t') {
            Delimiter::Tab
        } else if first.contains(',') {
            Delimiter::Comma
        } else {
            Delimiter::Whitespace
        }
    }
}

/// Column reference: header name or 0-based position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Column {
    Name(String),
    Index(usize),
}

impl Column {
    pub fn name(s: &str) -> Self {
        Column::Name(s.to_string())
    }

    /// Digits are a position, anything else a header name.
    pub fn parse(s: &str) -> Self {
        s.parse().map(Column::Index).unwrap_or_else(|_| Column::name(s))
    }

    fn locate(&self, role: &str, header: Option<&[String]>, source_name: &str) -> Result<usize> {
        match self {
            Column::Index(i) => Ok(*i),
            Column::Name(name) => {
                let header = header.ok_or_else(|| {
                    Error::parse(source_name, 1, format!("{role} column {name:?} needs a header row"))
                })?;
                header
                    .iter()
                    .position(|h| h.trim().eq_ignore_ascii_case(name))
                    .ok_or_else(|| Error::parse(source_name, 1, format!("missing {role} column {name:?}")))
            }
        }
    }
}

/// Where the concept, feature and frequency of a norm file live.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormMapping {
    pub concept: Column,
    pub feature: Column,
    pub frequency: Column,
    pub delimiter: Delimiter,
    /// Number of participants; defaults to the largest frequency.
    pub source_count: Option<u32>,
}

impl NormMapping {
    pub fn new(concept: Column, feature: Column, frequency: Column) -> Self {
        NormMapping {
            concept,
            feature,
            frequency,
            delimiter: Delimiter::Auto,
            source_count: None,
        }
    }

    /// Named layouts: `mcrae` and `cslb`.
    pub fn preset(name: &str) -> Option<Self> {
        match name.to_lowercase().as_str() {
            "mcrae" => Some(Self::new(
                Column::name("Concept"),
                Column::name("Feature"),
                Column::name("Prod_Freq"),
            )),
            "cslb" => Some(Self::new(
                Column::name("concept"),
                Column::name("feature"),
                Column::name("pf"),
            )),
            _ => None,
        }
    }
}

/// Where the two words and the score of a benchmark file live.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchmarkMapping {
    pub word_a: Column,
    pub word_b: Column,
    pub score: Column,
    pub delimiter: Delimiter,
    /// Drop a trailing part-of-speech tag such as `-n` from words.
    pub strip_pos_suffix: bool,
}

impl BenchmarkMapping {
    pub fn new(word_a: Column, word_b: Column, score: Column) -> Self {
        BenchmarkMapping {
            word_a,
            word_b,
            score,
            delimiter: Delimiter::Auto,
            strip_pos_suffix: false,
        }
    }

    /// Named layouts with their benchmark kind: `men` and `simlex`.
    pub fn preset(name: &str) -> Option<(Self, BenchmarkKind)> {
        match name.to_lowercase().as_str() {
            "men" => Some((
                BenchmarkMapping {
                    delimiter: Delimiter::Whitespace,
                    strip_pos_suffix: true,
                    ..Self::new(Column::Index(0), Column::Index(1), Column::Index(2))
                },
                BenchmarkKind::Relatedness,
            )),
            "simlex" => Some((
                Self::new(Column::name("word1"), Column::name("word2"), Column::name("SimLex999")),
                BenchmarkKind::Similarity,
            )),
            _ => None,
        }
    }
}

/// Records with their 1-based line numbers; blank lines are skipped.
fn read_records(text: &str, delimiter: Delimiter, source_name: &str) -> Result<Vec<(usize, Vec<String>)>> {
    let sep = match delimiter.resolve(text) {
        Delimiter::Whitespace => {
            return Ok(text
                .lines()
                .enumerate()
                .filter(|(_, l)| !l.trim().is_empty())
                .map(|(i, l)| (i + 1, l.split_whitespace().map(str::to_string).collect()))
                .collect());
        }
        Delimiter::Tab => b'\t',
        _ => b',',
    };
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(sep)
        .has_headers(false)
        .flexible(true)
        .quoting(sep == b',')
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(source_name, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        out.push((line, record.iter().map(|f| f.trim().to_string()).collect()));
    }
    Ok(out)
}

fn field<'a>(record: &'a [String], col: usize, role: &str, line: usize, source_name: &str) -> Result<&'a str> {
    record
        .get(col)
        .map(String::as_str)
        .ok_or_else(|| Error::parse(source_name, line, format!("row has no {role} column (index {col})")))
}

/// Reads a human norm file with a header row. Text is lowercased; rows
/// repeating a (concept, feature) pair are summed, and each repeat yields a
/// warning.
pub fn parse_norm_file(text: &str, source_name: &str, mapping: &NormMapping) -> Result<(FeatureNorm, Vec<String>)> {
    let records = read_records(text, mapping.delimiter, source_name)?;
    let Some(((_, header), rows)) = records.split_first() else {
        return Err(Error::parse(source_name, 1, "norm file is empty"));
    };
    let concept = mapping.concept.locate("concept", Some(header), source_name)?;
    let feature = mapping.feature.locate("feature", Some(header), source_name)?;
    let frequency = mapping.frequency.locate("frequency", Some(header), source_name)?;

    let mut sums: BTreeMap<(String, String), u32> = BTreeMap::new();
    let mut warnings = Vec::new();
    for (line, row) in rows {
        let c = field(row, concept, "concept", *line, source_name)?.to_lowercase();
        let f = field(row, feature, "feature", *line, source_name)?.to_lowercase();
        let raw = field(row, frequency, "frequency", *line, source_name)?;
        if c.is_empty() || f.is_empty() {
            return Err(Error::parse(source_name, *line, "empty concept or feature"));
        }
        let n: u32 = raw.parse().map_err(|_| {
            Error::parse(
                source_name,
                *line,
                format!("frequency {raw:?} is not a positive integer"),
            )
        })?;
        if n == 0 {
            return Err(Error::parse(source_name, *line, "frequency must be at least 1"));
        }
        let slot = sums.entry((c.clone(), f.clone())).or_insert(0);
        if *slot > 0 {
            warnings.push(format!("{source_name}:{line}: ({c}, {f}) repeated; frequencies summed"));
        }
        *slot += n;
    }
    if sums.is_empty() {
        return Err(Error::parse(source_name, 1, "norm file has no rows"));
    }
    let source_count = mapping
        .source_count
        .unwrap_or_else(|| sums.values().copied().max().unwrap_or(1));
    let entries = sums.into_iter().map(|((c, f), n)| NormEntry::new(c, f, n)).collect();
    Ok((FeatureNorm::new(entries, source_count, Provenance::Human), warnings))
}

/// Reads a concept list: `id, name, disambiguator?, categories?` with
/// `;`-separated categories. A header row is recognised by its first field
/// being `id`.
pub fn parse_concepts(text: &str, source_name: &str) -> Result<Vec<Concept>> {
    let mut out = Vec::new();
    let mut ids = BTreeSet::new();
    let mut first = true;
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        if std::mem::take(&mut first) && fields[0].eq_ignore_ascii_case("id") {
            continue;
        }
        if fields.len() < 2 || fields.len() > 4 {
            return Err(Error::parse(
                source_name,
                line_no,
                format!("expected 2 to 4 tab-separated fields, found {}", fields.len()),
            ));
        }
        let concept = Concept::new(fields[0], fields[1].to_lowercase())
            .map_err(|e| Error::parse(source_name, line_no, e.to_string()))?
            .with_disambiguator(fields.get(2).copied().unwrap_or("").to_lowercase())
            .with_categories(
                fields
                    .get(3)
                    .copied()
                    .unwrap_or("")
                    .split(';')
                    .map(|c| c.trim().to_lowercase())
                    .filter(|c| !c.is_empty()),
            );
        if !ids.insert(concept.id.clone()) {
            return Err(Error::parse(
                source_name,
                line_no,
                format!("duplicate concept id {}", concept.id),
            ));
        }
        out.push(concept);
    }
    Ok(out)
}

fn strip_pos(word: &str) -> &str {
    match word.rsplit_once('-') {
        Some((stem, tag)) if !stem.is_empty() && matches!(tag, "n" | "v" | "a" | "j" | "r") => stem,
        _ => word,
    }
}

/// Reads a word-pair benchmark. The first row is a header when its score
/// field is not a number.
pub fn parse_benchmark(
    text: &str,
    source_name: &str,
    kind: BenchmarkKind,
    mapping: &BenchmarkMapping,
) -> Result<PairBenchmark> {
    let records = read_records(text, mapping.delimiter, source_name)?;
    let header: Option<&[String]> = match records.first() {
        Some((_, first)) => {
            let score_at = match &mapping.score {
                Column::Index(i) => Some(*i),
                Column::Name(n) => first.iter().position(|h| h.eq_ignore_ascii_case(n)),
            };
            let numeric = score_at
                .and_then(|i| first.get(i))
                .is_some_and(|s| s.parse::<f64>().is_ok());
            (!numeric).then_some(first.as_slice())
        }
        None => None,
    };
    let a = mapping.word_a.locate("word_a", header, source_name)?;
    let b = mapping.word_b.locate("word_b", header, source_name)?;
    let s = mapping.score.locate("score", header, source_name)?;
    let rows = &records[usize::from(header.is_some())..];
    let mut pairs = Vec::with_capacity(rows.len());
    for (line, row) in rows {
        let mut word_a = field(row, a, "word_a", *line, source_name)?;
        let mut word_b = field(row, b, "word_b", *line, source_name)?;
        if mapping.strip_pos_suffix {
            word_a = strip_pos(word_a);
            word_b = strip_pos(word_b);
        }
        let raw = field(row, s, "score", *line, source_name)?;
        let score: f64 = raw
            .parse()
            .map_err(|_| Error::parse(source_name, *line, format!("score {raw:?} is not a number")))?;
        pairs.push(BenchmarkPair {
            word_a: word_a.to_string(),
            word_b: word_b.to_string(),
            score,
        });
    }
    PairBenchmark::new(kind, pairs).map_err(|e| Error::parse(source_name, 0, e.to_string()))
}
