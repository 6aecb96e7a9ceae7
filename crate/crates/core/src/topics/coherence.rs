//! C_v topic coherence: boolean sliding windows, NPMI context vectors,
//! one-set segmentation and cosine confirmation.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lda::LdaModel;
use crate::{Error, Result};

/// Probability floor and NPMI smoothing constant.
pub const EPSILON: f64 = 1e-12;
pub const DEFAULT_WINDOW: usize = 110;
pub const DEFAULT_TOP_N: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoherenceReport {
    pub per_topic: Vec<f64>,
    pub mean: f64,
    pub top_words: Vec<Vec<String>>,
    pub window: usize,
}

/// Window counts for a fixed word list: how many windows contain each word
/// and each requested pair.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WindowCounts {
    pub windows: usize,
    pub single: Vec<usize>,
    pub pair: HashMap<(usize, usize), usize>,
}

impl WindowCounts {
    fn merge(mut self, other: WindowCounts) -> WindowCounts {
        self.windows += other.windows;
        if self.single.len() < other.single.len() {
            self.single.resize(other.single.len(), 0);
        }
        for (a, b) in self.single.iter_mut().zip(&other.single) {
            *a += b;
        }
        for (k, v) in other.pair {
            *self.pair.entry(k).or_default() += v;
        }
        self
    }

    pub fn p(&self, i: usize) -> f64 {
        self.single[i] as f64 / self.windows.max(1) as f64
    }

    pub fn p_pair(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.p(i);
        }
        let key = (i.min(j), i.max(j));
        self.pair.get(&key).copied().unwrap_or(0) as f64 / self.windows.max(1) as f64
    }
}

/// Merged window-start intervals (inclusive) in which a word is present.
fn coverage(positions: &[usize], window: usize, n_windows: usize) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = Vec::new();
    for &p in positions {
        let lo = (p + 1).saturating_sub(window);
        let hi = p.min(n_windows - 1);
        match out.last_mut() {
            Some(last) if lo <= last.1 + 1 => last.1 = last.1.max(hi),
            _ => out.push((lo, hi)),
        }
    }
    out
}

fn covered(iv: &[(usize, usize)]) -> usize {
    iv.iter().map(|&(a, b)| b - a + 1).sum()
}

fn intersection(a: &[(usize, usize)], b: &[(usize, usize)]) -> usize {
    let (mut i, mut j, mut total) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        let lo = a[i].0.max(b[j].0);
        let hi = a[i].1.min(b[j].1);
        if lo <= hi {
            total += hi - lo + 1;
        }
        if a[i].1 < b[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    total
}

/// Count windows of length `window` sliding one token at a time. A document
/// shorter than the window is a single window; empty documents contribute
/// none.
pub fn count_windows<S: AsRef<str> + Sync>(
    docs: &[Vec<S>],
    words: &[String],
    pairs: &[(usize, usize)],
    window: usize,
) -> WindowCounts {
    let index: HashMap<&str, usize> = words.iter().enumerate().map(|(i, w)| (w.as_str(), i)).collect();
    docs.par_iter()
        .map(|doc| {
            let mut counts = WindowCounts {
                single: vec![0; words.len()],
                ..Default::default()
            };
            if doc.is_empty() {
                return counts;
            }
            let n_windows = doc.len().saturating_sub(window) + 1;
            counts.windows = n_windows;
            let mut positions: Vec<Vec<usize>> = vec![Vec::new(); words.len()];
            for (p, w) in doc.iter().enumerate() {
                if let Some(&i) = index.get(w.as_ref()) {
                    positions[i].push(p);
                }
            }
            let cov: Vec<Vec<(usize, usize)>> = positions.iter().map(|ps| coverage(ps, window, n_windows)).collect();
            for (i, c) in cov.iter().enumerate() {
                counts.single[i] = covered(c);
            }
            for &(i, j) in pairs {
                if cov[i].is_empty() || cov[j].is_empty() {
                    continue;
                }
                let n = intersection(&cov[i], &cov[j]);
                if n > 0 {
                    *counts.pair.entry((i.min(j), i.max(j))).or_default() += n;
                }
            }
            counts
        })
        .reduce(WindowCounts::default, WindowCounts::merge)
}

/// Normalised PMI with probability floor `EPSILON`. A pair that co-occurs in
/// every window has NPMI 1.
pub fn npmi(p_i: f64, p_j: f64, p_ij: f64) -> f64 {
    let num = p_ij + EPSILON;
    let denom = -num.ln();
    if denom <= EPSILON {
        return 1.0;
    }
    (num / (p_i.max(EPSILON) * p_j.max(EPSILON))).ln() / denom
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// C_v of one topic from its word indices into `counts`.
fn topic_cv(ids: &[usize], counts: &WindowCounts) -> f64 {
    let vectors: Vec<Vec<f64>> = ids
        .iter()
        .map(|&i| {
            ids.iter()
                .map(|&j| npmi(counts.p(i), counts.p(j), counts.p_pair(i, j)))
                .collect()
        })
        .collect();
    let total: Vec<f64> = (0..ids.len()).map(|c| vectors.iter().map(|v| v[c]).sum()).collect();
    vectors.iter().map(|v| cosine(v, &total)).sum::<f64>() / ids.len() as f64
}

/// C_v for explicit topic word lists.
pub fn coherence_for_topics<S: AsRef<str> + Sync>(
    topics: &[Vec<String>],
    docs: &[Vec<S>],
    window: usize,
) -> Result<CoherenceReport> {
    if window == 0 {
        return Err(Error::InvalidInput("coherence window must be positive".into()));
    }
    if topics.is_empty() || topics.iter().any(|t| t.len() < 2) {
        return Err(Error::InvalidInput("every topic needs at least two words".into()));
    }
    let mut words: Vec<String> = Vec::new();
    let mut local: HashMap<String, usize> = HashMap::new();
    let ids: Vec<Vec<usize>> = topics
        .iter()
        .map(|t| {
            t.iter()
                .map(|w| {
                    *local.entry(w.clone()).or_insert_with(|| {
                        words.push(w.clone());
                        words.len() - 1
                    })
                })
                .collect()
        })
        .collect();
    let mut pairs: Vec<(usize, usize)> = ids
        .iter()
        .flat_map(|t| {
            t.iter()
                .flat_map(move |&a| t.iter().filter(move |&&b| a < b).map(move |&b| (a, b)))
        })
        .collect();
    pairs.sort_unstable();
    pairs.dedup();
    let counts = count_windows(docs, &words, &pairs, window);
    let per_topic: Vec<f64> = ids.iter().map(|t| topic_cv(t, &counts)).collect();
    let mean = per_topic.iter().sum::<f64>() / per_topic.len() as f64;
    Ok(CoherenceReport {
        per_topic,
        mean,
        top_words: topics.to_vec(),
        window,
    })
}

/// C_v of a trained model's top words against a reference corpus.
pub fn coherence_cv<S: AsRef<str> + Sync>(
    model: &LdaModel,
    docs: &[Vec<S>],
    top_n: usize,
    window: usize,
) -> Result<CoherenceReport> {
    let topics: Vec<Vec<String>> = (0..model.k)
        .map(|t| model.top_terms(t, top_n).into_iter().map(String::from).collect())
        .collect();
    coherence_for_topics(&topics, docs, window)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_counts(docs: &[Vec<&str>], words: &[String], window: usize) -> (usize, Vec<usize>, Vec<Vec<usize>>) {
        let n = words.len();
        let mut single = vec![0; n];
        let mut pair = vec![vec![0; n]; n];
        let mut total = 0;
        for doc in docs.iter().filter(|d| !d.is_empty()) {
            let starts = doc.len().saturating_sub(window) + 1;
            for s in 0..starts {
                let win = &doc[s..(s + window).min(doc.len())];
                total += 1;
                let present: Vec<bool> = words.iter().map(|w| win.contains(&w.as_str())).collect();
                for i in 0..n {
                    if present[i] {
                        single[i] += 1;
                    }
                    for j in 0..n {
                        if present[i] && present[j] {
                            pair[i][j] += 1;
                        }
                    }
                }
            }
        }
        (total, single, pair)
    }

    #[test]
    fn interval_counts_match_window_enumeration() {
        let vocab = ["a", "b", "c", "d", "e"];
        let mut state = 7u64;
        let mut next = || {
            state = crate::util::mix64(state);
            state
        };
        let docs: Vec<Vec<&str>> = (0..30)
            .map(|_| {
                let len = (next() % 25) as usize;
                (0..len).map(|_| vocab[(next() % 5) as usize]).collect()
            })
            .collect();
        let words: Vec<String> = ["a", "c", "e", "zz"].iter().map(|s| s.to_string()).collect();
        let pairs: Vec<(usize, usize)> = vec![(0, 1), (0, 2), (1, 2), (0, 3)];
        for window in [1, 3, 7, 30] {
            let fast = count_windows(&docs, &words, &pairs, window);
            let (total, single, pair) = brute_counts(&docs, &words, window);
            assert_eq!(fast.windows, total);
            assert_eq!(fast.single, single);
            for &(i, j) in &pairs {
                assert_eq!(fast.pair.get(&(i, j)).copied().unwrap_or(0), pair[i][j], "pair {i},{j} window {window}");
            }
        }
    }

    #[test]
    fn always_cooccurring_words_score_one() {
        let doc = vec!["sun", "moon", "star", "sky"];
        let docs = vec![doc.clone(); 20];
        let topic: Vec<String> = doc.iter().map(|s| s.to_string()).collect();
        let r = coherence_for_topics(&[topic], &docs, DEFAULT_WINDOW).unwrap();
        assert!((r.per_topic[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn identical_topics_score_identically() {
        let docs = vec![vec!["a", "b", "x"], vec!["a", "c"], vec!["b", "c", "y"]];
        let t: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let r = coherence_for_topics(&[t.clone(), t], &docs, 10).unwrap();
        assert_eq!(r.per_topic[0], r.per_topic[1]);
    }

    #[test]
    fn absent_word_is_finite() {
        let docs = vec![vec!["a", "b"], vec!["a"]];
        let t: Vec<String> = ["a", "missing"].iter().map(|s| s.to_string()).collect();
        let r = coherence_for_topics(&[t], &docs, 10).unwrap();
        assert!(r.per_topic[0].is_finite());
    }

    #[test]
    fn one_word_topic_is_rejected() {
        let docs = vec![vec!["a"]];
        assert!(coherence_for_topics(&[vec!["a".to_string()]], &docs, 10).is_err());
    }
}
