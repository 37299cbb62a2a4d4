//! Canonical file formats: the norm TSV with its `key=value` sidecar, and the
//! similarity-matrix TSV.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{FeatureNorm, NormEntry, Provenance, SimilarityMatrix};
use crate::error::{Error, Result};

pub const NORM_HEADER: &str = "concept_id\tfeature\tfrequency";

pub fn norm_to_tsv(norm: &FeatureNorm) -> String {
    let mut out = String::with_capacity(32 * norm.entries().len() + 32);
    out.push_str(NORM_HEADER);
    out.push('\n');
    for e in norm.entries() {
        let _ = writeln!(out, "{}\t{}\t{}", e.concept_id, e.feature, e.frequency);
    }
    out
}

pub fn norm_metadata(norm: &FeatureNorm) -> String {
    format!(
        "source_count={}\nprovenance={}\nempty_concepts={}\n",
        norm.source_count(),
        norm.provenance(),
        norm.empty_concepts().join(";")
    )
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NormMetadata {
    pub source_count: Option<u32>,
    pub provenance: Option<Provenance>,
    pub empty_concepts: Vec<String>,
}

pub fn parse_metadata(text: &str, source_name: &str) -> Result<NormMetadata> {
    let mut meta = NormMetadata::default();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(source_name, i + 1, "expected key=value"))?;
        let value = value.trim();
        match key.trim() {
            "source_count" => {
                let n = value
                    .parse()
                    .map_err(|_| Error::parse(source_name, i + 1, "source_count is not an integer"))?;
                meta.source_count = Some(n);
            }
            "provenance" => {
                meta.provenance = Some(
                    Provenance::parse(value)
                        .ok_or_else(|| Error::parse(source_name, i + 1, format!("unknown provenance {value:?}")))?,
                );
            }
            "empty_concepts" => {
                meta.empty_concepts = value
                    .split(';')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(String::from)
                    .collect();
            }
            _ => {}
        }
    }
    Ok(meta)
}

/// Parses a canonical norm TSV. Without metadata, the source count defaults to
/// the largest frequency and provenance to human.
pub fn parse_norm_tsv(text: &str, meta: Option<&NormMetadata>, source_name: &str) -> Result<FeatureNorm> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim_end_matches('\r') == NORM_HEADER => {}
        Some(_) => return Err(Error::parse(source_name, 1, format!("expected header {NORM_HEADER:?}"))),
        None => return Err(Error::parse(source_name, 1, "empty file")),
    }
    let mut entries = Vec::new();
    for (i, line) in lines {
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                source_name,
                i + 1,
                format!("expected 3 tab-separated fields, found {}", fields.len()),
            ));
        }
        let frequency = fields[2].parse::<u32>().map_err(|_| {
            Error::parse(
                source_name,
                i + 1,
                format!("frequency {:?} is not a nonnegative integer", fields[2]),
            )
        })?;
        entries.push(NormEntry::new(fields[0], fields[1], frequency));
    }
    let default_meta = NormMetadata::default();
    let meta = meta.unwrap_or(&default_meta);
    let source_count = meta
        .source_count
        .unwrap_or_else(|| entries.iter().map(|e| e.frequency).max().unwrap_or(0));
    let mut concepts: BTreeSet<String> = entries.iter().map(|e| e.concept_id.clone()).collect();
    concepts.extend(meta.empty_concepts.iter().cloned());
    Ok(FeatureNorm::with_concepts(
        entries,
        source_count,
        meta.provenance.unwrap_or(Provenance::Human),
        concepts,
    ))
}

/// Sidecar path for a norm file: `<path>.meta`.
pub fn metadata_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

pub fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_string(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn read_norm(path: &Path) -> Result<FeatureNorm> {
    let name = path.display().to_string();
    let text = read_to_string(path)?;
    let meta_path = metadata_path(path);
    let meta = if meta_path.exists() {
        Some(parse_metadata(
            &read_to_string(&meta_path)?,
            &meta_path.display().to_string(),
        )?)
    } else {
        None
    };
    parse_norm_tsv(&text, meta.as_ref(), &name)
}

pub fn write_norm(path: &Path, norm: &FeatureNorm) -> Result<()> {
    write_string(path, &norm_to_tsv(norm))?;
    write_string(&metadata_path(path), &norm_metadata(norm))
}

pub fn similarity_to_tsv(s: &SimilarityMatrix) -> String {
    let mut out = String::from("concept_id");
    for id in s.ids() {
        out.push('\t');
        out.push_str(id);
    }
    out.push('\n');
    for (i, id) in s.ids().iter().enumerate() {
        out.push_str(id);
        for j in 0..s.len() {
            let _ = write!(out, "\t{}", s.get(i, j));
        }
        out.push('\n');
    }
    out
}

pub fn parse_similarity_tsv(text: &str, source_name: &str) -> Result<SimilarityMatrix> {
    let mut lines = text
        .lines()
        .map(|l| l.trim_end_matches('\r'))
        .enumerate()
        .filter(|(_, l)| !l.is_empty());
    let (_, header) = lines.next().ok_or_else(|| Error::parse(source_name, 1, "empty file"))?;
    let ids: Vec<String> = header.split('\t').skip(1).map(String::from).collect();
    let n = ids.len();
    let mut values = Vec::with_capacity(n * n);
    let mut rows = 0;
    for (i, line) in lines {
        let fields: Vec<&str> = line.split('\t').collect();
        if rows >= n {
            return Err(Error::parse(source_name, i + 1, "more rows than header columns"));
        }
        if fields.len() != n + 1 {
            return Err(Error::parse(
                source_name,
                i + 1,
                format!("expected {} fields, found {}", n + 1, fields.len()),
            ));
        }
        if fields[0] != ids[rows] {
            return Err(Error::parse(
                source_name,
                i + 1,
                format!("row id {:?} does not match column id {:?}", fields[0], ids[rows]),
            ));
        }
        for f in &fields[1..] {
            let v = f
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::parse(source_name, i + 1, format!("{f:?} is not a number")))?;
            values.push(v);
        }
        rows += 1;
    }
    if rows != n {
        return Err(Error::parse(
            source_name,
            rows + 2,
            format!("expected {n} rows, found {rows}"),
        ));
    }
    SimilarityMatrix::new(ids, values).map_err(|e| Error::parse(source_name, 1, e.to_string()))
}

pub fn read_similarity(path: &Path) -> Result<SimilarityMatrix> {
    parse_similarity_tsv(&read_to_string(path)?, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn feature() -> impl Strategy<Value = String> {
        prop::sample::select(vec!["it is red", "it has legs", "it can fly", "they are big"]).prop_map(String::from)
    }

    proptest! {
        #[test]
        fn norm_round_trip(
            entries in prop::collection::btree_map(("c[0-9]{2}", feature()), 1u32..30, 0..20),
            empty in prop::collection::btree_set("e[0-9]", 0..3),
        ) {
            let entries: Vec<NormEntry> = entries
                .into_iter()
                .map(|((c, f), n)| NormEntry::new(c, f, n))
                .collect();
            let mut concepts: BTreeSet<String> = entries.iter().map(|e| e.concept_id.clone()).collect();
            concepts.extend(empty);
            let norm = FeatureNorm::with_concepts(entries, 30, Provenance::Generated, concepts);
            let meta = parse_metadata(&norm_metadata(&norm), "meta").unwrap();
            let back = parse_norm_tsv(&norm_to_tsv(&norm), Some(&meta), "tsv").unwrap();
            prop_assert_eq!(back, norm);
        }

        #[test]
        fn similarity_round_trip(vals in prop::collection::vec(0.0f64..1.0, 6)) {
            let v = [
                1.0, vals[0], vals[1], vals[2],
                vals[0], 1.0, vals[3], vals[4],
                vals[1], vals[3], 1.0, vals[5],
                vals[2], vals[4], vals[5], 1.0,
            ];
            let ids = vec!["a".to_string(), "b".into(), "c".into(), "d".into()];
            let s = SimilarityMatrix::new(ids, v.to_vec()).unwrap();
            let back = parse_similarity_tsv(&similarity_to_tsv(&s), "s").unwrap();
            prop_assert_eq!(back, s);
        }
    }

    #[test]
    fn shuffled_entries_build_equal_norms() {
        let a = vec![NormEntry::new("c1", "it is a", 1), NormEntry::new("c2", "it is b", 2)];
        let mut b = a.clone();
        b.reverse();
        assert_eq!(
            FeatureNorm::new(a, 2, Provenance::Human),
            FeatureNorm::new(b, 2, Provenance::Human)
        );
    }

    #[test]
    fn bad_lines_are_located() {
        let err = parse_norm_tsv("concept_id\tfeature\tfrequency\nc1\tit is x\tthree\n", None, "n.tsv").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(parse_norm_tsv("wrong header\n", None, "n.tsv").is_err());
        assert!(parse_metadata("source_count=abc", "m").is_err());
    }

    #[test]
    fn metadata_defaults() {
        let n = parse_norm_tsv("concept_id\tfeature\tfrequency\nc1\tx y\t4\n", None, "n").unwrap();
        assert_eq!(n.source_count(), 4);
        assert_eq!(n.provenance(), Provenance::Human);
    }
}
