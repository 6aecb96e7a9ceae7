//! Collapsed Gibbs sampling for LDA.

use std::fs;
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::vocab::{DocTermMatrix, Vocabulary};
use crate::util::stream_rng;
use crate::{Error, Result};

const MAGIC: &str = "MORALENS-LDA 1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LdaParams {
    pub k: usize,
    /// Document-topic concentration; `None` means `50 / k`.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub iterations: usize,
    pub burn_in: usize,
    /// Sweeps between retained samples after burn-in.
    pub thin: usize,
    pub seed: u64,
}

impl LdaParams {
    pub fn new(k: usize, seed: u64) -> Self {
        LdaParams {
            k,
            alpha: None,
            beta: 0.01,
            iterations: 1000,
            burn_in: 200,
            thin: 10,
            seed,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(50.0 / self.k as f64)
    }
}

/// Sampler state: token words, assignments and the three count tables.
pub struct GibbsSampler {
    k: usize,
    v: usize,
    alpha: f64,
    beta: f64,
    words: Vec<Vec<u32>>,
    z: Vec<Vec<u16>>,
    ndk: Vec<u32>,
    nkw: Vec<u32>,
    nk: Vec<u32>,
    rng: ChaCha8Rng,
    probs: Vec<f64>,
}

fn sample(probs: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let total: f64 = probs.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, p) in probs.iter().enumerate() {
        u -= p;
        if u < 0.0 {
            return i;
        }
    }
    probs.len() - 1
}

impl GibbsSampler {
    pub fn new(dtm: &DocTermMatrix, k: usize, alpha: f64, beta: f64, seed: u64) -> Self {
        let v = dtm.n_words;
        let mut rng = stream_rng(seed, 0);
        let words: Vec<Vec<u32>> = dtm
            .docs
            .iter()
            .map(|d| {
                d.iter()
                    .flat_map(|&(w, c)| std::iter::repeat_n(w, c as usize))
                    .collect()
            })
            .collect();
        let mut z = Vec::with_capacity(words.len());
        let mut ndk = vec![0; words.len() * k];
        let mut nkw = vec![0; k * v];
        let mut nk = vec![0; k];
        for (d, doc) in words.iter().enumerate() {
            let mut zd = Vec::with_capacity(doc.len());
            for &w in doc {
                let t = rng.random_range(0..k);
                zd.push(t as u16);
                ndk[d * k + t] += 1;
                nkw[t * v + w as usize] += 1;
                nk[t] += 1;
            }
            z.push(zd);
        }
        GibbsSampler {
            k,
            v,
            alpha,
            beta,
            words,
            z,
            ndk,
            nkw,
            nk,
            rng,
            probs: vec![0.0; k],
        }
    }

    /// One full sweep over every token.
    pub fn sweep(&mut self) {
        let (k, v) = (self.k, self.v);
        let vbeta = v as f64 * self.beta;
        for d in 0..self.words.len() {
            for i in 0..self.words[d].len() {
                let w = self.words[d][i] as usize;
                let old = self.z[d][i] as usize;
                self.ndk[d * k + old] -= 1;
                self.nkw[old * v + w] -= 1;
                self.nk[old] -= 1;
                for t in 0..k {
                    self.probs[t] = (self.ndk[d * k + t] as f64 + self.alpha) * (self.nkw[t * v + w] as f64 + self.beta)
                        / (self.nk[t] as f64 + vbeta);
                }
                let t = sample(&self.probs, &mut self.rng);
                self.z[d][i] = t as u16;
                self.ndk[d * k + t] += 1;
                self.nkw[t * v + w] += 1;
                self.nk[t] += 1;
            }
        }
    }

    /// Tokens currently assigned to any topic.
    pub fn assigned(&self) -> usize {
        self.nk.iter().map(|&c| c as usize).sum()
    }

    pub fn n_tokens(&self) -> usize {
        self.words.iter().map(Vec::len).sum()
    }

    pub fn phi(&self) -> Vec<Vec<f64>> {
        let vbeta = self.v as f64 * self.beta;
        (0..self.k)
            .map(|t| {
                let denom = self.nk[t] as f64 + vbeta;
                (0..self.v)
                    .map(|w| (self.nkw[t * self.v + w] as f64 + self.beta) / denom)
                    .collect()
            })
            .collect()
    }

    pub fn theta(&self) -> Vec<Vec<f64>> {
        let kalpha = self.k as f64 * self.alpha;
        (0..self.words.len())
            .map(|d| {
                let denom = self.words[d].len() as f64 + kalpha;
                (0..self.k)
                    .map(|t| (self.ndk[d * self.k + t] as f64 + self.alpha) / denom)
                    .collect()
            })
            .collect()
    }

    pub fn assignments(&self) -> &[Vec<u16>] {
        &self.z
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LdaModel {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub vocab: Vocabulary,
    /// K rows over the vocabulary.
    pub phi: Vec<Vec<f64>>,
    /// One row per training document.
    pub theta: Vec<Vec<f64>>,
    /// Final token-topic assignments of the training documents.
    pub assignments: Vec<Vec<u16>>,
    pub seed: u64,
    pub iterations: usize,
}

fn add_into(acc: &mut [Vec<f64>], rows: &[Vec<f64>]) {
    for (a, r) in acc.iter_mut().zip(rows) {
        for (x, y) in a.iter_mut().zip(r) {
            *x += y;
        }
    }
}

fn normalize_rows(rows: &mut [Vec<f64>]) {
    for r in rows {
        let s: f64 = r.iter().sum();
        r.iter_mut().for_each(|x| *x /= s);
    }
}

/// Train by collapsed Gibbs sampling. Phi and theta are averaged over the
/// post-burn-in samples taken every `thin` sweeps (or read from the final
/// state if no sample falls after burn-in).
pub fn train_lda(vocab: &Vocabulary, dtm: &DocTermMatrix, params: &LdaParams) -> Result<LdaModel> {
    let k = params.k;
    if k == 0 {
        return Err(Error::InvalidInput("topic count must be at least 1".into()));
    }
    if dtm.n_docs() == 0 || dtm.n_tokens() == 0 {
        return Err(Error::InvalidInput("document-term matrix is empty".into()));
    }
    if k > dtm.n_words {
        return Err(Error::TooManyTopics { k, vocab: dtm.n_words });
    }
    if k > u16::MAX as usize {
        return Err(Error::InvalidInput(format!("topic count {k} too large")));
    }
    let alpha = params.alpha();
    let mut sampler = GibbsSampler::new(dtm, k, alpha, params.beta, params.seed);
    let mut phi = vec![vec![0.0; dtm.n_words]; k];
    let mut theta = vec![vec![0.0; k]; dtm.n_docs()];
    let mut samples = 0usize;
    let thin = params.thin.max(1);
    for it in 1..=params.iterations {
        sampler.sweep();
        if it > params.burn_in && (it - params.burn_in).is_multiple_of(thin) {
            add_into(&mut phi, &sampler.phi());
            add_into(&mut theta, &sampler.theta());
            samples += 1;
        }
    }
    if samples == 0 {
        phi = sampler.phi();
        theta = sampler.theta();
    }
    normalize_rows(&mut phi);
    normalize_rows(&mut theta);
    Ok(LdaModel {
        k,
        alpha,
        beta: params.beta,
        vocab: vocab.clone(),
        phi,
        theta,
        assignments: sampler.assignments().to_vec(),
        seed: params.seed,
        iterations: params.iterations,
    })
}

impl LdaModel {
    /// Indices of the `n` most probable words of topic `t`.
    pub fn top_words(&self, t: usize, n: usize) -> Vec<usize> {
        let row = &self.phi[t];
        let mut idx: Vec<usize> = (0..row.len()).collect();
        idx.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
        idx.truncate(n);
        idx
    }

    pub fn top_terms(&self, t: usize, n: usize) -> Vec<&str> {
        self.top_words(t, n).into_iter().map(|i| self.vocab.word(i)).collect()
    }

    /// Mean of theta over training documents.
    pub fn prevalence(&self) -> Vec<f64> {
        let mut p = vec![0.0; self.k];
        for row in &self.theta {
            for (a, x) in p.iter_mut().zip(row) {
                *a += x;
            }
        }
        let n = self.theta.len().max(1) as f64;
        p.iter_mut().for_each(|x| *x /= n);
        p
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = format!("{MAGIC}\n").into_bytes();
        out.extend(serde_json::to_vec(self).expect("model serialises"));
        out.push(b'\n');
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let text = std::str::from_utf8(bytes).map_err(|e| Error::Archive(e.to_string()))?;
        let body = text
            .strip_prefix(MAGIC)
            .and_then(|b| b.strip_prefix('\n'))
            .ok_or_else(|| Error::Archive(format!("missing `{MAGIC}` header")))?;
        let mut m: LdaModel = serde_json::from_str(body).map_err(|e| Error::Archive(e.to_string()))?;
        m.vocab.reindex();
        if m.phi.len() != m.k || m.phi.iter().any(|r| r.len() != m.vocab.len()) {
            return Err(Error::Archive("phi shape does not match K and vocabulary".into()));
        }
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        LdaModel::from_bytes(&bytes)
    }
}

/// Topic proportions of a new document by fold-in Gibbs sampling with phi
/// frozen. The first half of the sweeps is discarded; the smoothed theta is
/// averaged over the rest. Documents without in-vocabulary words get the
/// uniform vector.
pub fn infer_topics<S: AsRef<str>>(model: &LdaModel, lemmas: &[S], iterations: usize, seed: u64) -> Vec<f64> {
    let k = model.k;
    let words: Vec<usize> = lemmas.iter().filter_map(|l| model.vocab.get(l.as_ref())).collect();
    if words.is_empty() {
        return vec![1.0 / k as f64; k];
    }
    let mut rng = stream_rng(seed, 0);
    let mut ndk = vec![0u32; k];
    let mut z: Vec<usize> = words
        .iter()
        .map(|_| {
            let t = rng.random_range(0..k);
            ndk[t] += 1;
            t
        })
        .collect();
    let denom = words.len() as f64 + k as f64 * model.alpha;
    let smoothed = |ndk: &[u32]| -> Vec<f64> { ndk.iter().map(|&c| (c as f64 + model.alpha) / denom).collect() };

    let mut probs = vec![0.0; k];
    let mut acc = vec![0.0; k];
    let mut samples = 0usize;
    let start = iterations / 2;
    for it in 0..iterations {
        for (i, &w) in words.iter().enumerate() {
            ndk[z[i]] -= 1;
            for t in 0..k {
                probs[t] = (ndk[t] as f64 + model.alpha) * model.phi[t][w];
            }
            z[i] = sample(&probs, &mut rng);
            ndk[z[i]] += 1;
        }
        if it >= start {
            for (a, x) in acc.iter_mut().zip(smoothed(&ndk)) {
                *a += x;
            }
            samples += 1;
        }
    }
    if samples == 0 {
        acc = smoothed(&ndk);
    }
    let s: f64 = acc.iter().sum();
    acc.iter_mut().for_each(|x| *x /= s);
    acc
}
