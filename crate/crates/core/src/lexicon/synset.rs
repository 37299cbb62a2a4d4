use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use crate::error::{Error, Result};

static BUNDLED: &str = include_str!("data/synsets.tsv");

/// Word → frequency-ordered synset ids, plus the inverse membership map.
///
/// The sense order is taken from the source file; the most frequent sense
/// comes first.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SynsetLexicon {
    senses: BTreeMap<String, Vec<String>>,
    members: BTreeMap<String, BTreeSet<String>>,
    fold_plural: bool,
}

impl SynsetLexicon {
    pub fn bundled() -> &'static SynsetLexicon {
        static LEX: OnceLock<SynsetLexicon> = OnceLock::new();
        LEX.get_or_init(|| parse_synset_lexicon(BUNDLED, "bundled synsets.tsv").expect("bundled synsets parse"))
    }

    /// When enabled, a word missing from the lexicon is retried with a
    /// plural ending removed ("cars" → "car", "boxes" → "box", "berries" → "berry").
    pub fn with_plural_fold(mut self, fold: bool) -> Self {
        self.fold_plural = fold;
        self
    }

    pub fn insert(&mut self, word: &str, synsets: Vec<String>) {
        let word = word.to_lowercase();
        for id in &synsets {
            self.members.entry(id.clone()).or_default().insert(word.clone());
        }
        let list = self.senses.entry(word).or_default();
        for id in synsets {
            if !list.contains(&id) {
                list.push(id);
            }
        }
    }

    /// Synset ids for `word`, most frequent first.
    pub fn synsets(&self, word: &str) -> Option<&[String]> {
        if let Some(s) = self.senses.get(word) {
            return Some(s);
        }
        if !self.fold_plural {
            return None;
        }
        singular_candidates(word)
            .into_iter()
            .find_map(|w| self.senses.get(&w))
            .map(Vec::as_slice)
    }

    pub fn top_synset(&self, word: &str) -> Option<&str> {
        self.synsets(word).and_then(|s| s.first()).map(String::as_str)
    }

    /// Words listing `synset` among their senses.
    pub fn members(&self, synset: &str) -> Option<&BTreeSet<String>> {
        self.members.get(synset)
    }

    pub fn len(&self) -> usize {
        self.senses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.senses.is_empty()
    }

    pub fn are_synonyms(&self, w1: &str, w2: &str) -> bool {
        match (self.top_synset(w1), self.top_synset(w2)) {
            (Some(a), Some(b)) => a == b,
            _ => false,
        }
    }
}

fn singular_candidates(word: &str) -> Vec<String> {
    let mut out = Vec::new();
    if let Some(stem) = word.strip_suffix("ies") {
        out.push(format!("{stem}y"));
    }
    if let Some(stem) = word.strip_suffix("es") {
        out.push(stem.to_string());
    }
    if let Some(stem) = word.strip_suffix('s') {
        out.push(stem.to_string());
    }
    out.retain(|w| !w.is_empty());
    out
}

/// True iff both words are listed and share their most frequent synset.
pub fn are_synonyms(w1: &str, w2: &str, lex: &SynsetLexicon) -> bool {
    lex.are_synonyms(w1, w2)
}

/// Parses either the simplified `word<TAB>id;id;...` format or a WordNet
/// `index.<pos>` file. The format is chosen from the first non-empty line.
pub fn parse_synset_lexicon(text: &str, source_name: &str) -> Result<SynsetLexicon> {
    let first = text.lines().find(|l| !l.trim().is_empty());
    match first {
        None => Ok(SynsetLexicon::default()),
        Some(l) if l.contains('\t') => parse_tsv(text, source_name),
        Some(_) => parse_wordnet_index(text, source_name),
    }
}

fn parse_tsv(text: &str, source_name: &str) -> Result<SynsetLexicon> {
    let mut lex = SynsetLexicon::default();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (word, ids) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(source_name, i + 1, "expected word<TAB>synsets"))?;
        let word = word.trim();
        let ids: Vec<String> = ids
            .split(';')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect();
        if word.is_empty() || ids.is_empty() || ids.iter().any(|s| s.contains(char::is_whitespace)) {
            return Err(Error::parse(source_name, i + 1, format!("malformed entry {line:?}")));
        }
        lex.insert(word, ids);
    }
    Ok(lex)
}

/// WordNet index line:
/// `lemma pos synset_cnt p_cnt [ptr_symbol...] sense_cnt tagsense_cnt synset_offset...`.
/// Lines starting with a space are the license header. Synset ids are
/// rendered as `<offset>-<pos>`.
fn parse_wordnet_index(text: &str, source_name: &str) -> Result<SynsetLexicon> {
    let mut lex = SynsetLexicon::default();
    for (i, line) in text.lines().enumerate() {
        if line.starts_with(' ') || line.trim().is_empty() {
            continue;
        }
        let bad = |msg: &str| Error::parse(source_name, i + 1, msg.to_string());
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 6 {
            return Err(bad("too few fields for a WordNet index line"));
        }
        let lemma = fields[0];
        let pos = fields[1];
        let synset_cnt: usize = fields[2].parse().map_err(|_| bad("synset_cnt is not a number"))?;
        let p_cnt: usize = fields[3].parse().map_err(|_| bad("p_cnt is not a number"))?;
        let offsets_at = 4 + p_cnt + 2;
        if fields.len() != offsets_at + synset_cnt {
            return Err(bad("field count does not match synset_cnt and p_cnt"));
        }
        let ids = fields[offsets_at..]
            .iter()
            .map(|off| {
                if off.len() == 8 && off.bytes().all(|b| b.is_ascii_digit()) {
                    Ok(format!("{off}-{pos}"))
                } else {
                    Err(bad("synset offset must be 8 digits"))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        lex.insert(&lemma.replace('_', " "), ids);
    }
    Ok(lex)
}
