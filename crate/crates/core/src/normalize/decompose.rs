use crate::lexicon::ClosedClassLexicon;

fn starts_with_vowel(word: &str) -> bool {
    matches!(word.chars().next(), Some('a' | 'e' | 'i' | 'o' | 'u'))
}

/// Sets the indefinite article before `next` to "a" or "an".
fn repair_article(tokens: &mut [String]) {
    for i in 0..tokens.len().saturating_sub(1) {
        if tokens[i] == "a" || tokens[i] == "an" {
            tokens[i] = if starts_with_vowel(&tokens[i + 1]) { "an" } else { "a" }.to_string();
        }
    }
}

/// `... copula det adj+ noun` → (`... copula det adj* noun`, `... copula adj`).
fn split_attributive(tokens: &[&str], lex: &ClosedClassLexicon) -> Option<[Vec<String>; 2]> {
    let cop = tokens.iter().position(|t| lex.copulas.contains(*t))?;
    let n = tokens.len();
    // copula, determiner, at least one adjective, final noun
    if n < cop + 4 || !lex.determiners.contains(tokens[cop + 1]) || !lex.nouns.contains(tokens[n - 1]) {
        return None;
    }
    if !tokens[cop + 2..n - 1].iter().all(|t| lex.adjectives.contains(*t)) {
        return None;
    }
    let adjective = tokens[cop + 2];
    let mut head: Vec<String> = tokens[..cop + 2]
        .iter()
        .chain(&tokens[cop + 3..])
        .map(|t| t.to_string())
        .collect();
    repair_article(&mut head[cop + 1..]);
    let mut predicate: Vec<String> = tokens[..=cop].iter().map(|t| t.to_string()).collect();
    predicate.push(adjective.to_string());
    Some([head, predicate])
}

/// `prefix L and R` where the conjuncts are both adjectives (`det? adj`) or
/// both nouns (`det? adj* noun` on the left, `det? noun` on the right)
/// → (`prefix L`, `prefix R`). Splits at the last coordinator; the prefix
/// must not end in an adjective or noun, whose scope would be ambiguous.
fn split_coordination(tokens: &[&str], lex: &ClosedClassLexicon) -> Option<[Vec<String>; 2]> {
    let and = tokens.iter().rposition(|t| lex.coordinators.contains(*t))?;
    let right = &tokens[and + 1..];
    let right_word = match right {
        [w] => *w,
        [d, w] if lex.determiners.contains(*d) => *w,
        _ => return None,
    };
    if and < 2 {
        return None;
    }
    let left_word = tokens[and - 1];
    let mut left_start = and - 1;
    if lex.nouns.contains(left_word) && lex.nouns.contains(right_word) {
        while left_start > 1 && lex.adjectives.contains(tokens[left_start - 1]) {
            left_start -= 1;
        }
    } else if !(lex.adjectives.contains(left_word) && lex.adjectives.contains(right_word)) {
        return None;
    }
    if left_start > 1 && lex.determiners.contains(tokens[left_start - 1]) {
        left_start -= 1;
    }
    let prefix = &tokens[..left_start];
    match prefix.last() {
        None => return None,
        Some(last) if lex.adjectives.contains(*last) || lex.nouns.contains(*last) => return None,
        Some(_) => {}
    }
    let build = |conjunct: &[&str]| -> Vec<String> { prefix.iter().chain(conjunct).map(|t| t.to_string()).collect() };
    Some([build(&tokens[left_start..and]), build(right)])
}

/// Splits compound features until no pattern applies.
///
/// Outputs keep first-derivation order and are deduplicated. A feature that
/// matches neither pattern comes back unchanged as the only output.
pub fn decompose_feature(cleaned: &str, lex: &ClosedClassLexicon) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut stack: Vec<String> = vec![cleaned.to_string()];
    while let Some(feature) = stack.pop() {
        let tokens: Vec<&str> = feature.split_whitespace().collect();
        match split_attributive(&tokens, lex).or_else(|| split_coordination(&tokens, lex)) {
            Some([first, second]) => {
                // push in reverse so the first part is expanded first
                stack.push(second.join(" "));
                stack.push(first.join(" "));
            }
            None => {
                if !out.contains(&feature) {
                    out.push(feature);
                }
            }
        }
    }
    out
}
