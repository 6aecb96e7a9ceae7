//! Permutation importance with Pearson r as the score.

use ndarray::ArrayView2;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::models::{pearson, Regressor};
use crate::util::{derive_seed, stream_rng};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Importance {
    pub feature: usize,
    pub mean: f64,
    pub sd: f64,
}

fn score(pred: &[f64], y: &[f64]) -> Result<f64> {
    match pearson(pred, y) {
        Ok(r) => Ok(r),
        // a constant prediction carries no information
        Err(Error::UndefinedCorrelation) => Ok(0.0),
        Err(e) => Err(e),
    }
}

/// Baseline r minus r after shuffling one column, averaged over `repeats`.
/// Column `j`, repeat `r` is shuffled with `derive_seed(seed, [j, r])`.
pub fn permutation_importance<M: Regressor + Sync + ?Sized>(
    model: &M,
    x: ArrayView2<f64>,
    y: &[f64],
    repeats: usize,
    seed: u64,
) -> Result<Vec<Importance>> {
    if x.nrows() != y.len() {
        return Err(Error::InvalidInput(format!("{} rows but {} targets", x.nrows(), y.len())));
    }
    if repeats == 0 {
        return Err(Error::InvalidInput("permutation importance needs at least one repeat".into()));
    }
    let baseline = score(&model.predict(x), y)?;
    let mut work = x.to_owned();
    let mut out = Vec::with_capacity(x.ncols());
    for j in 0..x.ncols() {
        let original = x.column(j).to_vec();
        let mut drops = Vec::with_capacity(repeats);
        for r in 0..repeats {
            let mut col = original.clone();
            col.shuffle(&mut stream_rng(derive_seed(seed, &[j as u64, r as u64]), 0));
            work.column_mut(j).iter_mut().zip(&col).for_each(|(d, s)| *d = *s);
            drops.push(baseline - score(&model.predict(work.view()), y)?);
        }
        work.column_mut(j).iter_mut().zip(&original).for_each(|(d, s)| *d = *s);
        let mean = drops.iter().sum::<f64>() / repeats as f64;
        let sd = (drops.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / repeats as f64).sqrt();
        out.push(Importance { feature: j, mean, sd });
    }
    Ok(out)
}
