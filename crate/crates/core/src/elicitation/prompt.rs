use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::lexicon::ClosedClassLexicon;
use crate::model::{Concept, FeatureNorm};

const CONCEPT_SLOT: &str = "{concept}";

/// A concept with ground-truth features used as a question/answer example.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimingExample {
    pub concept: Concept,
    /// Feature phrases in answer order, e.g. "it is furniture".
    pub features: Vec<String>,
}

impl PrimingExample {
    pub fn new(concept: Concept, features: Vec<String>) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::argument(format!(
                "priming example {} has no features",
                concept.id
            )));
        }
        Ok(PrimingExample { concept, features })
    }

    /// Builds one example per concept of a human norm, phrasing each feature as
    /// a sentence starting with a pronoun. Features are ordered by production
    /// frequency (then text) and truncated to `max_features`. Concepts missing
    /// from `concepts` use their id as name.
    pub fn from_norm(
        norm: &FeatureNorm,
        concepts: &[Concept],
        max_features: usize,
        lex: &ClosedClassLexicon,
    ) -> Result<Vec<PrimingExample>> {
        let mut out = Vec::new();
        for id in norm.concepts() {
            let mut entries: Vec<_> = norm.entries_for(id).iter().collect();
            if entries.is_empty() {
                continue;
            }
            entries.sort_by(|a, b| b.frequency.cmp(&a.frequency).then_with(|| a.feature.cmp(&b.feature)));
            let features = entries
                .iter()
                .take(max_features)
                .map(|e| phrase_feature(&e.feature, lex))
                .collect();
            let concept = match concepts.iter().find(|c| &c.id == id) {
                Some(c) => c.clone(),
                None => Concept::new(id.clone(), id.replace('_', " "))?,
            };
            out.push(PrimingExample::new(concept, features)?);
        }
        Ok(out)
    }
}

/// Turns a human-norm feature label ("has_legs", "made_of_wood",
/// "beh_-_eats") into a sentence fragment ("it has legs", "it is made of
/// wood", "it eats").
pub fn phrase_feature(label: &str, lex: &ClosedClassLexicon) -> String {
    let label = label
        .trim()
        .trim_start_matches("inbeh_-_")
        .trim_start_matches("beh_-_")
        .replace('_', " ");
    let words: Vec<&str> = label.split_whitespace().collect();
    match words.first() {
        None => String::new(),
        Some(w) if lex.pronouns.contains(*w) => words.join(" "),
        Some(w) if lex.verbs.contains(*w) => format!("it {}", words.join(" ")),
        Some(_) => format!("it is {}", words.join(" ")),
    }
}

/// Layout of the priming prompt.
///
/// The default renders every example as
/// `Q: What are the properties of a {name}?\nA: It is f1, it is f2.` and ends
/// with the open question followed by `A:`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    question: String,
    pub question_prefix: String,
    pub answer_prefix: String,
    pub separator: String,
    pub examples_per_prompt: usize,
    /// Render query concepts with their disambiguator as well as examples.
    pub disambiguate_queries: bool,
}

impl Default for PromptTemplate {
    fn default() -> Self {
        PromptTemplate {
            question: "What are the properties of a {concept}?".to_string(),
            question_prefix: "Q: ".to_string(),
            answer_prefix: "A:".to_string(),
            separator: "\n\n".to_string(),
            examples_per_prompt: 3,
            disambiguate_queries: true,
        }
    }
}

impl PromptTemplate {
    /// `question` must contain exactly one `{concept}` slot.
    pub fn new(question: impl Into<String>, examples_per_prompt: usize) -> Result<Self> {
        let question = question.into();
        if question.matches(CONCEPT_SLOT).count() != 1 {
            return Err(Error::argument(format!(
                "question format must contain exactly one {CONCEPT_SLOT} slot: {question:?}"
            )));
        }
        Ok(PromptTemplate {
            question,
            examples_per_prompt,
            ..Default::default()
        })
    }

    pub fn question_format(&self) -> &str {
        &self.question
    }

    pub fn question(&self, rendered_name: &str) -> String {
        format!(
            "{}{}",
            self.question_prefix,
            self.question.replace(CONCEPT_SLOT, rendered_name)
        )
    }

    pub fn answer(features: &[String]) -> String {
        let mut text = features.join(", ");
        if let Some(first) = text.get(..1) {
            text = first.to_uppercase() + &text[1..];
        }
        text.push('.');
        text
    }

    /// Everything before the open question. Identical for every concept of a
    /// run.
    pub fn priming_prefix(&self, examples: &[PrimingExample]) -> Result<String> {
        if examples.len() != self.examples_per_prompt {
            return Err(Error::argument(format!(
                "template expects {} examples, got {}",
                self.examples_per_prompt,
                examples.len()
            )));
        }
        let mut out = String::new();
        for ex in examples {
            out.push_str(&self.question(&ex.concept.display_name()));
            out.push('\n');
            out.push_str(&self.answer_prefix);
            out.push(' ');
            out.push_str(&Self::answer(&ex.features));
            out.push_str(&self.separator);
        }
        Ok(out)
    }

    pub fn open_question(&self, concept: &Concept) -> String {
        let name = if self.disambiguate_queries {
            concept.display_name()
        } else {
            concept.name.clone()
        };
        format!("{}\n{}", self.question(&name), self.answer_prefix)
    }

    /// Recovers the rendered concept name from the open question at the end of
    /// a prompt built with this template.
    pub fn extract_concept<'a>(&self, prompt: &'a str) -> Option<&'a str> {
        let (before, after) = self.question.split_once(CONCEPT_SLOT)?;
        let body = prompt.strip_suffix(&self.answer_prefix)?.trim_end_matches('\n');
        let last = body.rsplit('\n').next()?;
        last.strip_prefix(&self.question_prefix)?
            .strip_prefix(before)?
            .strip_suffix(after)
    }
}

pub fn build_prompt(concept: &Concept, examples: &[PrimingExample], template: &PromptTemplate) -> Result<String> {
    let mut prompt = template.priming_prefix(examples)?;
    prompt.push_str(&template.open_question(concept));
    Ok(prompt)
}

pub fn prompt_hash(prompt: &str) -> String {
    hex::encode(Sha256::digest(prompt.as_bytes()))
}
