use std::fmt;

use serde::Serialize;

use crate::lexicon::ClosedClassLexicon;

/// Why [`clean_feature`] dropped a feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RemovalReason {
    Nonsensical,
    SingleWord,
    Tautological,
    NoPronounStart,
    NonAscii,
    QuestionMark,
}

impl RemovalReason {
    pub const ALL: [RemovalReason; 6] = [
        RemovalReason::Nonsensical,
        RemovalReason::SingleWord,
        RemovalReason::Tautological,
        RemovalReason::NoPronounStart,
        RemovalReason::NonAscii,
        RemovalReason::QuestionMark,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RemovalReason::Nonsensical => "nonsensical",
            RemovalReason::SingleWord => "single_word",
            RemovalReason::Tautological => "tautological",
            RemovalReason::NoPronounStart => "no_pronoun_start",
            RemovalReason::NonAscii => "non_ascii",
            RemovalReason::QuestionMark => "question_mark",
        }
    }
}

impl fmt::Display for RemovalReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CleanOutcome {
    Kept {
        text: String,
        /// At least one qualifier adverb was deleted.
        qualifier_stripped: bool,
        /// A subordinate clause was cut off.
        truncated: bool,
    },
    Removed(RemovalReason),
}

impl CleanOutcome {
    pub fn text(&self) -> Option<&str> {
        match self {
            CleanOutcome::Kept { text, .. } => Some(text),
            CleanOutcome::Removed(_) => None,
        }
    }
}

const TERMINAL_PUNCTUATION: &[char] = &['.', '!', ';', ':'];

/// Splits a completion at commas into lowercase, trimmed feature strings.
///
/// Question marks are kept so that [`clean_feature`] can reject the feature.
pub fn split_response(completion: &str) -> Vec<String> {
    completion
        .split(',')
        .map(|piece| {
            piece
                .trim()
                .trim_end_matches(|c: char| TERMINAL_PUNCTUATION.contains(&c) || c.is_whitespace())
                .trim()
                .to_lowercase()
        })
        .filter(|piece| !piece.is_empty())
        .collect()
}

/// `det? X copula det? X` with the same X on both sides.
pub(crate) fn is_tautology<'a>(tokens: &'a [&'a str], lex: &ClosedClassLexicon) -> bool {
    let strip_det = |side: &'a [&'a str]| -> &'a [&'a str] {
        match side.split_first() {
            Some((first, rest)) if lex.determiners.contains(*first) => rest,
            _ => side,
        }
    };
    tokens.iter().enumerate().any(|(i, tok)| {
        if !lex.copulas.contains(*tok) {
            return false;
        }
        let left = strip_det(&tokens[..i]);
        let right = strip_det(&tokens[i + 1..]);
        !left.is_empty() && left == right
    })
}

/// Applies the removal rules, then deletes qualifier adverbs and truncates
/// before the first subordinate clause.
///
/// Checks run in a fixed order, and the first failing check names the
/// reason: single word, tautology, pronoun start, 7-bit text, question
/// mark, then (after qualifier removal) the verb-position gate.
pub fn clean_feature(raw: &str, lex: &ClosedClassLexicon) -> CleanOutcome {
    let tokens: Vec<&str> = raw.split_whitespace().collect();
    if tokens.len() < 2 {
        return CleanOutcome::Removed(RemovalReason::SingleWord);
    }
    if is_tautology(&tokens, lex) {
        return CleanOutcome::Removed(RemovalReason::Tautological);
    }
    if !lex.pronouns.contains(tokens[0]) {
        return CleanOutcome::Removed(RemovalReason::NoPronounStart);
    }
    if !raw.is_ascii() {
        return CleanOutcome::Removed(RemovalReason::NonAscii);
    }
    if raw.contains('?') {
        return CleanOutcome::Removed(RemovalReason::QuestionMark);
    }

    let mut kept: Vec<&str> = tokens
        .iter()
        .copied()
        .filter(|t| !lex.qualifier_adverbs.contains(*t))
        .collect();
    let qualifier_stripped = kept.len() != tokens.len();
    if kept.len() < 2 {
        return CleanOutcome::Removed(RemovalReason::SingleWord);
    }
    if !lex.verbs.contains(kept[1]) {
        return CleanOutcome::Removed(RemovalReason::Nonsensical);
    }

    let cut = kept
        .iter()
        .skip(1)
        .position(|t| lex.subordinators.contains(*t))
        .map(|p| p + 1);
    let truncated = cut.is_some();
    if let Some(cut) = cut {
        kept.truncate(cut);
    }
    if kept.len() < 2 {
        return CleanOutcome::Removed(RemovalReason::SingleWord);
    }
    // truncation can expose a tautology ("it is it that ...")
    if is_tautology(&kept, lex) {
        return CleanOutcome::Removed(RemovalReason::Tautological);
    }
    CleanOutcome::Kept {
        text: kept.join(" "),
        qualifier_stripped,
        truncated,
    }
}
