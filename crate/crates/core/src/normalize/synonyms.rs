use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use crate::lexicon::{ClosedClassLexicon, SynsetLexicon};

fn article_neutral(token: &str) -> &str {
    if token == "an" {
        "a"
    } else {
        token
    }
}

/// `a` outranks `b`: higher count, ties to the lexicographically smaller text.
fn outranks(a: (&str, u64), b: (&str, u64)) -> bool {
    match a.1.cmp(&b.1) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => a.0 < b.0,
    }
}

/// One collapse round over distinct features: each feature maps to the
/// best-ranked variant that outranks it.
fn collapse_round(
    counts: &BTreeMap<String, u64>,
    closed: &ClosedClassLexicon,
    lex: &SynsetLexicon,
) -> BTreeMap<String, String> {
    // Bucket by (slot position, text with that slot blanked and a/an merged,
    // top synset of the slot word). Members of a bucket are pairwise variants
    // unless their slot words coincide.
    type Key<'a> = (usize, String, &'a str);
    let mut buckets: HashMap<Key, Vec<(&str, &str)>> = HashMap::new();
    for feature in counts.keys() {
        let tokens: Vec<&str> = feature.split_whitespace().collect();
        for (pos, word) in tokens.iter().enumerate() {
            if closed.is_function_word(word) {
                continue;
            }
            let Some(top) = lex.top_synset(word) else {
                continue;
            };
            let key: Vec<&str> = tokens
                .iter()
                .enumerate()
                .map(|(i, t)| if i == pos { "\u{0}" } else { article_neutral(t) })
                .collect();
            buckets
                .entry((pos, key.join(" "), top))
                .or_default()
                .push((feature.as_str(), *word));
        }
    }

    let mut best: BTreeMap<&str, &str> = BTreeMap::new();
    for members in buckets.values() {
        for &(feature, word) in members {
            for &(other, other_word) in members {
                if other_word == word || !outranks((other, counts[other]), (feature, counts[feature])) {
                    continue;
                }
                let current = best.entry(feature).or_insert(other);
                if outranks((other, counts[other]), (current, counts[*current])) {
                    *current = other;
                }
            }
        }
    }
    best.into_iter()
        .map(|(from, to)| (from.to_string(), to.to_string()))
        .collect()
}

/// Maps every feature that gets rewritten to its final replacement.
///
/// `counts` holds the total count of each distinct feature. Rounds repeat
/// until no feature has an outranking variant, so applying the map a second
/// time changes nothing.
pub fn synonym_map(
    counts: &BTreeMap<String, u64>,
    closed: &ClosedClassLexicon,
    lex: &SynsetLexicon,
) -> BTreeMap<String, String> {
    let mut counts = counts.clone();
    let mut mapping: BTreeMap<String, String> = BTreeMap::new();
    loop {
        let round = collapse_round(&counts, closed, lex);
        if round.is_empty() {
            break;
        }
        for (from, to) in &round {
            let moved = counts.remove(from).unwrap_or(0);
            *counts.get_mut(to).expect("target is live") += moved;
        }
        // compose: earlier targets may have been rewritten in this round
        for target in mapping.values_mut() {
            if let Some(next) = round.get(target) {
                *target = next.clone();
            }
        }
        mapping.extend(round);
    }
    mapping
}

/// Rewrites synonym variants to their most frequent form.
///
/// Returns the rewritten multiset (same order and length as the input) and
/// the number of occurrences that changed.
pub fn collapse_synonyms(
    features: &[String],
    closed: &ClosedClassLexicon,
    lex: &SynsetLexicon,
) -> (Vec<String>, usize) {
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for f in features {
        *counts.entry(f.clone()).or_default() += 1;
    }
    let mapping = synonym_map(&counts, closed, lex);
    let mut replaced = 0;
    let out = features
        .iter()
        .map(|f| match mapping.get(f) {
            Some(to) => {
                replaced += 1;
                to.clone()
            }
            None => f.clone(),
        })
        .collect();
    (out, replaced)
}
