use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Vocabulary {
    words: Vec<String>,
    doc_freq: Vec<usize>,
    #[serde(skip)]
    index: HashMap<String, usize>,
    pub n_docs: usize,
    pub max_df: f64,
    pub min_df: usize,
}

impl Vocabulary {
    pub fn from_words(words: Vec<String>, doc_freq: Vec<usize>, n_docs: usize, max_df: f64, min_df: usize) -> Self {
        let mut v = Vocabulary {
            words,
            doc_freq,
            index: HashMap::new(),
            n_docs,
            max_df,
            min_df,
        };
        v.reindex();
        v
    }

    /// Rebuild the lookup map, e.g. after deserialisation.
    pub fn reindex(&mut self) {
        self.index = self.words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn word(&self, i: usize) -> &str {
        &self.words[i]
    }

    pub fn doc_freq(&self, i: usize) -> usize {
        self.doc_freq[i]
    }

    pub fn get(&self, w: &str) -> Option<usize> {
        self.index.get(w).copied()
    }

    /// Sparse term counts of a document; out-of-vocabulary words dropped.
    pub fn doc_terms<S: AsRef<str>>(&self, lemmas: &[S]) -> Vec<(u32, u32)> {
        let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
        for l in lemmas {
            if let Some(i) = self.get(l.as_ref()) {
                *counts.entry(i as u32).or_default() += 1;
            }
        }
        counts.into_iter().collect()
    }
}

/// Per-document sparse term counts, sorted by word index.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DocTermMatrix {
    pub docs: Vec<Vec<(u32, u32)>>,
    pub n_words: usize,
}

impl DocTermMatrix {
    pub fn n_docs(&self) -> usize {
        self.docs.len()
    }

    pub fn doc_len(&self, d: usize) -> usize {
        self.docs[d].iter().map(|&(_, c)| c as usize).sum()
    }

    pub fn n_tokens(&self) -> usize {
        (0..self.docs.len()).map(|d| self.doc_len(d)).sum()
    }
}

/// Vocabulary of words with `min_df <= df` and `df / n_docs <= max_df`,
/// sorted alphabetically, and the matching document-term matrix.
pub fn build_vocab<S: AsRef<str>>(docs: &[Vec<S>], max_df: f64, min_df: usize) -> Result<(Vocabulary, DocTermMatrix)> {
    if docs.is_empty() {
        return Err(Error::InvalidInput("cannot build a vocabulary from an empty corpus".into()));
    }
    let n = docs.len();
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in docs {
        let distinct: HashSet<&str> = doc.iter().map(|w| w.as_ref()).collect();
        for w in distinct {
            *df.entry(w).or_default() += 1;
        }
    }
    // tolerance keeps an exact 90% boundary on the inclusive side
    let cap = max_df * n as f64 + 1e-9;
    let (words, freqs): (Vec<String>, Vec<usize>) = df
        .into_iter()
        .filter(|&(_, c)| c >= min_df && (c as f64) <= cap)
        .map(|(w, c)| (w.to_string(), c))
        .unzip();
    if words.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    let vocab = Vocabulary::from_words(words, freqs, n, max_df, min_df);
    let dtm = DocTermMatrix {
        docs: docs.iter().map(|d| vocab.doc_terms(d)).collect(),
        n_words: vocab.len(),
    };
    Ok((vocab, dtm))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus(n: usize, with_word: usize) -> Vec<Vec<&'static str>> {
        (0..n)
            .map(|i| if i < with_word { vec!["common", "filler"] } else { vec!["filler"] })
            .collect()
    }

    #[test]
    fn max_df_boundary_is_inclusive() {
        let docs = corpus(10, 9);
        let mut docs = docs;
        docs[9].clear();
        docs[9].push("other");
        let (v, _) = build_vocab(&docs, 0.9, 1).unwrap();
        assert!(v.get("common").is_some());
        assert!(v.get("filler").is_some());
    }

    #[test]
    fn frequent_word_is_excluded() {
        let mut docs = corpus(20, 19);
        docs[19] = vec!["rare"];
        let (v, _) = build_vocab(&docs, 0.9, 1).unwrap();
        assert!(v.get("common").is_none());
        assert!(v.get("rare").is_some());
    }

    #[test]
    fn min_df_is_enforced() {
        let mut docs: Vec<Vec<&str>> = (0..10).map(|_| vec!["base"]).collect();
        for d in docs.iter_mut().take(4) {
            d.push("seldom");
        }
        for d in docs.iter_mut().take(5) {
            d.push("often");
        }
        let (v, dtm) = build_vocab(&docs, 1.0, 5).unwrap();
        assert!(v.get("seldom").is_none());
        assert_eq!(v.words(), ["base", "often"]);
        assert_eq!(dtm.docs[0], vec![(0, 1), (1, 1)]);
    }

    #[test]
    fn empty_vocabulary_is_an_error() {
        let docs = vec![vec!["a"], vec!["b"]];
        assert!(matches!(build_vocab(&docs, 0.9, 5), Err(Error::EmptyVocabulary)));
    }
}
