//! The two token streams: surface tokens for sentiment scoring, and lemmas
//! for topics, moral valence and emotions.

mod lemma;

pub use lemma::{LemmaTable, SuffixRule};

use std::collections::HashSet;
use std::path::Path;

use unicode_normalization::UnicodeNormalization;

use crate::util::read_lines;
use crate::Result;

/// Surface tokens in source order; case and attached punctuation preserved.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TokenStream {
    pub tokens: Vec<String>,
}

impl TokenStream {
    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }
}

impl<S: Into<String>> FromIterator<S> for TokenStream {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        TokenStream {
            tokens: iter.into_iter().map(Into::into).collect(),
        }
    }
}

/// Lowercase lemmas in source order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LemmaStream {
    pub lemmas: Vec<String>,
    /// Alphabetic tokens before stopword removal.
    pub word_count: usize,
}

impl LemmaStream {
    pub fn lemma_count(&self) -> usize {
        self.lemmas.len()
    }

    pub fn distinct_lemma_count(&self) -> usize {
        self.lemmas.iter().collect::<HashSet<_>>().len()
    }

    pub fn is_empty(&self) -> bool {
        self.lemmas.is_empty()
    }
}

impl<S: Into<String>> FromIterator<S> for LemmaStream {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        let lemmas: Vec<String> = iter.into_iter().map(Into::into).collect();
        LemmaStream {
            word_count: lemmas.len(),
            lemmas,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stopwords(HashSet<String>);

impl Stopwords {
    pub fn load(path: &Path) -> Result<Self> {
        Ok(read_lines(path)?
            .into_iter()
            .map(|(_, l)| l.trim().to_lowercase())
            .collect())
    }

    pub fn contains(&self, w: &str) -> bool {
        self.0.contains(w)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<S: Into<String>> FromIterator<S> for Stopwords {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Stopwords(iter.into_iter().map(Into::into).collect())
    }
}

/// Characters folded to the ASCII apostrophe.
const APOSTROPHES: [char; 8] = [
    '\u{2019}', // right single quotation mark
    '\u{2018}', // left single quotation mark
    '\u{201B}', // single high-reversed-9 quotation mark
    '\u{02BC}', // modifier letter apostrophe
    '\u{02B9}', // modifier letter prime
    '\u{2032}', // prime
    '\u{00B4}', // acute accent
    '\u{0060}', // grave accent
];

/// NFKC normalisation, apostrophe folding, and removal of non-whitespace
/// control characters.
pub fn normalize(text: &str) -> String {
    text.nfkc()
        .filter_map(|c| {
            if APOSTROPHES.contains(&c) {
                Some('\'')
            } else if c.is_control() && !c.is_whitespace() {
                None
            } else {
                Some(c)
            }
        })
        .collect()
}

/// Whitespace tokenisation for sentiment scoring.
pub fn tokenize_preserving(text: &str) -> TokenStream {
    normalize(text).split_whitespace().collect()
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '\''
}

/// Lowercase, strip punctuation, drop stopwords and one-character tokens,
/// then map through the lemma table.
pub fn lemmatize(text: &str, table: &LemmaTable, stopwords: &Stopwords) -> LemmaStream {
    let lower = normalize(&normalize(text).to_lowercase());
    let mut lemmas = Vec::new();
    let mut word_count = 0;
    for raw in lower.split(|c: char| !is_word_char(c)) {
        let token = raw.trim_matches('\'');
        if token.is_empty() || !token.chars().all(|c| c.is_alphabetic() || c == '\'') {
            continue;
        }
        word_count += 1;
        if stopwords.contains(token) || token.chars().count() < 2 {
            continue;
        }
        let lemma = table.lemma(token);
        if stopwords.contains(lemma) || lemma.chars().count() < 2 {
            continue;
        }
        lemmas.push(lemma.to_string());
    }
    LemmaStream { lemmas, word_count }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> LemmaTable {
        LemmaTable::from_pairs([("running", "run"), ("dogs", "dog"), ("loves", "love"), ("loved", "love")]).unwrap()
    }

    fn stop() -> Stopwords {
        ["the", "of", "and", "a"].into_iter().collect()
    }

    #[test]
    fn whitespace_split_keeps_case_and_punctuation() {
        assert_eq!(tokenize_preserving("GOOD job!!!").tokens, vec!["GOOD", "job!!!"]);
        assert!(tokenize_preserving("").is_empty());
    }

    #[test]
    fn curly_apostrophe_is_folded() {
        assert_eq!(tokenize_preserving("don\u{2019}t stop").tokens, vec!["don't", "stop"]);
        // fullwidth apostrophe reaches ASCII through NFKC alone
        assert_eq!(tokenize_preserving("don\u{FF07}t").tokens, vec!["don't"]);
    }

    #[test]
    fn control_characters_are_stripped() {
        assert_eq!(tokenize_preserving("a\u{0007}b\tc").tokens, vec!["ab", "c"]);
    }

    #[test]
    fn lemmatize_uses_table() {
        let s = lemmatize("running dogs", &table(), &stop());
        assert_eq!(s.lemmas, vec!["run", "dog"]);
        assert_eq!(s.word_count, 2);
    }

    #[test]
    fn stopwords_only_gives_empty_stream() {
        let s = lemmatize("the of and", &table(), &stop());
        assert!(s.lemmas.is_empty());
        assert_eq!(s.word_count, 3);
    }

    #[test]
    fn love_forms_collapse() {
        let s = lemmatize("Love loves loved", &table(), &stop());
        assert_eq!(s.lemmas, vec!["love", "love", "love"]);
        assert_eq!(s.distinct_lemma_count(), 1);
    }

    #[test]
    fn digits_and_single_letters_are_dropped() {
        let s = lemmatize("x 42 b2b dogs", &table(), &stop());
        assert_eq!(s.lemmas, vec!["dog"]);
        // "x" and "dogs" are alphabetic words
        assert_eq!(s.word_count, 2);
    }
}
