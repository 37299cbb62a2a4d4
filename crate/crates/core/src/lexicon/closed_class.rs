use std::collections::BTreeSet;
use std::sync::OnceLock;

use crate::error::{Error, Result};

static BUNDLED: &str = include_str!("data/closed_class.txt");

/// Word lists driving the rule-based normalizer.
///
/// Sets overlap where English does: "that" is both a subordinator and a
/// pronoun, and many colour words are both adjectives and nouns.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClosedClassLexicon {
    pub pronouns: BTreeSet<String>,
    pub qualifier_adverbs: BTreeSet<String>,
    pub subordinators: BTreeSet<String>,
    pub coordinators: BTreeSet<String>,
    pub determiners: BTreeSet<String>,
    pub copulas: BTreeSet<String>,
    pub adjectives: BTreeSet<String>,
    pub nouns: BTreeSet<String>,
    /// Words accepted in verb position by the sensibleness gate.
    pub verbs: BTreeSet<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Section {
    Pronouns,
    QualifierAdverbs,
    Subordinators,
    Coordinators,
    Determiners,
    Copulas,
    Adjectives,
    Nouns,
    Verbs,
}

impl Section {
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "pronouns" => Section::Pronouns,
            "qualifier_adverbs" => Section::QualifierAdverbs,
            "subordinators" => Section::Subordinators,
            "coordinators" => Section::Coordinators,
            "determiners" => Section::Determiners,
            "copulas" => Section::Copulas,
            "adjectives" => Section::Adjectives,
            "nouns" => Section::Nouns,
            "verbs" => Section::Verbs,
            _ => return None,
        })
    }
}

impl ClosedClassLexicon {
    /// The lexicon shipped with the crate.
    pub fn bundled() -> &'static ClosedClassLexicon {
        static LEX: OnceLock<ClosedClassLexicon> = OnceLock::new();
        LEX.get_or_init(|| parse_closed_class(BUNDLED, "bundled closed_class.txt").expect("bundled lexicon parses"))
    }

    pub fn section_mut(&mut self, section: Section) -> &mut BTreeSet<String> {
        match section {
            Section::Pronouns => &mut self.pronouns,
            Section::QualifierAdverbs => &mut self.qualifier_adverbs,
            Section::Subordinators => &mut self.subordinators,
            Section::Coordinators => &mut self.coordinators,
            Section::Determiners => &mut self.determiners,
            Section::Copulas => &mut self.copulas,
            Section::Adjectives => &mut self.adjectives,
            Section::Nouns => &mut self.nouns,
            Section::Verbs => &mut self.verbs,
        }
    }

    /// Function words: everything except adjectives, nouns and verbs.
    pub fn is_function_word(&self, w: &str) -> bool {
        self.pronouns.contains(w)
            || self.qualifier_adverbs.contains(w)
            || self.subordinators.contains(w)
            || self.coordinators.contains(w)
            || self.determiners.contains(w)
            || self.copulas.contains(w)
    }
}

/// Parses the sectioned word-list format: `[section]` headers, one word per
/// line, `#` starts a comment. Duplicates are merged.
pub fn parse_closed_class(text: &str, source_name: &str) -> Result<ClosedClassLexicon> {
    let mut lex = ClosedClassLexicon::default();
    let mut current: Option<Section> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or_default().trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = Some(
                Section::from_name(name.trim())
                    .ok_or_else(|| Error::parse(source_name, i + 1, format!("unknown section [{name}]")))?,
            );
            continue;
        }
        let section = current.ok_or_else(|| Error::parse(source_name, i + 1, "word before any section header"))?;
        if line.split_whitespace().count() != 1 {
            return Err(Error::parse(
                source_name,
                i + 1,
                format!("expected one word, found {line:?}"),
            ));
        }
        lex.section_mut(section).insert(line.to_lowercase());
    }
    Ok(lex)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qualifier_section() {
        let lex = parse_closed_class("[qualifier_adverbs]\nusually\nreally\n", "t").unwrap();
        assert!(lex.qualifier_adverbs.contains("usually"));
        assert!(lex.pronouns.is_empty());
    }

    #[test]
    fn empty_file() {
        assert_eq!(parse_closed_class("", "t").unwrap(), ClosedClassLexicon::default());
    }

    #[test]
    fn duplicates_are_merged() {
        let lex = parse_closed_class("[pronouns]\nit\nit # again\nIt\n", "t").unwrap();
        assert_eq!(lex.pronouns.len(), 1);
    }

    #[test]
    fn unknown_section_reports_line() {
        let err = parse_closed_class("# c\n[pronouns]\nit\n[verbz]\n", "t").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err}");
        assert!(parse_closed_class("it\n", "t").is_err());
    }

    #[test]
    fn bundled_lexicon_is_well_formed() {
        let lex = ClosedClassLexicon::bundled();
        for w in ["which", "that", "when", "if", "but"] {
            assert!(lex.subordinators.contains(w));
        }
        assert!(lex.coordinators.contains("and"));
        assert!(lex.pronouns.contains("it") && lex.pronouns.contains("they"));
        assert!(lex.qualifier_adverbs.contains("usually") && lex.qualifier_adverbs.contains("really"));
        assert!(lex.copulas.contains("is"));
        assert!(lex.verbs.contains("is") && lex.verbs.contains("has"));
        let all = [
            &lex.pronouns,
            &lex.qualifier_adverbs,
            &lex.subordinators,
            &lex.coordinators,
            &lex.determiners,
            &lex.copulas,
            &lex.adjectives,
            &lex.nouns,
            &lex.verbs,
        ];
        for set in all {
            assert!(set.iter().all(|w| !w.is_empty() && *w == w.to_lowercase()));
        }
    }
}
