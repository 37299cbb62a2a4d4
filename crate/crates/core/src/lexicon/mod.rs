//! Lexical resources used by the normalizer: closed-class word lists and a
//! synset lexicon for synonym collapsing.

mod closed_class;
mod synset;

pub use closed_class::{parse_closed_class, ClosedClassLexicon, Section};
pub use synset::{are_synonyms, parse_synset_lexicon, SynsetLexicon};
