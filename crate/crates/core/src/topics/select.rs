use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::coherence::coherence_cv;
use super::lda::{train_lda, LdaParams};
use super::vocab::{DocTermMatrix, Vocabulary};
use crate::{Error, Result};

/// Coherence gaps at or below this are ties, resolved toward smaller k.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionRun {
    pub k: usize,
    pub seed: u64,
    pub mean_cv: f64,
    pub per_topic: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub best_k: usize,
    /// Mean C_v across seeds, one entry per grid value in ascending k.
    pub by_k: Vec<(usize, f64)>,
    pub runs: Vec<SelectionRun>,
}

/// Index of the best score; later entries must win by more than the tie
/// tolerance.
pub fn argmax_with_ties(scores: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &s) in scores.iter().enumerate() {
        match best {
            Some(b) if s <= scores[b] + TIE_TOLERANCE => {}
            _ => best = Some(i),
        }
    }
    best
}

/// Train one model per (k, seed) and pick the k with the highest mean C_v.
/// `base` supplies every LDA setting except k and the seed.
#[allow(clippy::too_many_arguments)]
pub fn select_k<S: AsRef<str> + Sync>(
    vocab: &Vocabulary,
    dtm: &DocTermMatrix,
    docs: &[Vec<S>],
    grid: &[usize],
    seeds: &[u64],
    base: &LdaParams,
    top_n: usize,
    window: usize,
) -> Result<Selection> {
    if grid.is_empty() || seeds.is_empty() {
        return Err(Error::InvalidInput("topic grid and seed list must be non-empty".into()));
    }
    let mut ks = grid.to_vec();
    ks.sort_unstable();
    ks.dedup();
    let jobs: Vec<(usize, u64)> = ks.iter().flat_map(|&k| seeds.iter().map(move |&s| (k, s))).collect();
    let runs: Vec<SelectionRun> = jobs
        .par_iter()
        .map(|&(k, seed)| {
            let params = LdaParams {
                k,
                seed,
                ..base.clone()
            };
            let model = train_lda(vocab, dtm, &params)?;
            let report = coherence_cv(&model, docs, top_n.min(vocab.len()), window)?;
            Ok(SelectionRun {
                k,
                seed,
                mean_cv: report.mean,
                per_topic: report.per_topic,
            })
        })
        .collect::<Result<_>>()?;
    let by_k: Vec<(usize, f64)> = ks
        .iter()
        .map(|&k| {
            let v: Vec<f64> = runs.iter().filter(|r| r.k == k).map(|r| r.mean_cv).collect();
            (k, v.iter().sum::<f64>() / v.len() as f64)
        })
        .collect();
    let scores: Vec<f64> = by_k.iter().map(|&(_, s)| s).collect();
    let best_k = by_k[argmax_with_ties(&scores).expect("grid is non-empty")].0;
    Ok(Selection { best_k, by_k, runs })
}
