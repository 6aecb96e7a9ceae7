//! Repeated k-fold cross-validation with per-fold normalisation.

use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::pearson;
use super::{FittedModel, ModelFamily, Regressor};
use crate::features::{ExperimentId, NormalizationParams};
use crate::util::{derive_seed, percentile, stream_rng};
use crate::{Error, Result, Target};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvParams {
    pub folds: usize,
    pub repeats: usize,
    pub seed: u64,
}

impl Default for CvParams {
    fn default() -> Self {
        CvParams {
            folds: 5,
            repeats: 20,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetCv {
    pub target: Target,
    /// Mean over folds with a defined r; NaN if there are none.
    pub mean_r: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// One entry per repeat × fold, `None` where r was undefined.
    pub fold_r: Vec<Option<f64>>,
    pub undefined: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub experiment: String,
    pub seed: u64,
    pub folds: usize,
    pub repeats: usize,
    pub targets: Vec<TargetCv>,
}

impl CvReport {
    pub fn target(&self, t: Target) -> Option<&TargetCv> {
        self.targets.iter().find(|r| r.target == t)
    }
}

/// Test-row indices of each fold for one repeat. Fold sizes differ by at
/// most one.
pub fn fold_indices(n: usize, k: usize, repeat: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut stream_rng(derive_seed(seed, &[repeat as u64]), 0));
    let base = n / k;
    let extra = n % k;
    let mut out = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        let mut idx = perm[start..start + len].to_vec();
        idx.sort_unstable();
        out.push(idx);
        start += len;
    }
    out
}

/// Rows of `y` shuffled jointly; used for permuted-target controls.
pub fn permute_rows(y: ArrayView2<f64>, seed: u64) -> Array2<f64> {
    let mut perm: Vec<usize> = (0..y.nrows()).collect();
    perm.shuffle(&mut stream_rng(seed, 0));
    y.select(Axis(0), &perm)
}

/// Summary statistics of a list of fold r values.
pub fn summarize(target: Target, fold_r: Vec<Option<f64>>) -> TargetCv {
    let defined: Vec<f64> = fold_r.iter().flatten().copied().collect();
    let undefined = fold_r.len() - defined.len();
    let mean_r = if defined.is_empty() {
        f64::NAN
    } else {
        defined.iter().sum::<f64>() / defined.len() as f64
    };
    TargetCv {
        target,
        mean_r,
        ci_low: percentile(&defined, 0.025),
        ci_high: percentile(&defined, 0.975),
        fold_r,
        undefined,
    }
}

/// Cross-validate one single-target model per column of `y` (`targets[j]`
/// names column `j`). Normalisation is fitted on the training rows of each
/// fold only. Fold assignment depends on the seed and repeat alone, so
/// experiments evaluated with the same seed share their folds.
pub fn cross_validate(
    x: ArrayView2<f64>,
    y: ArrayView2<f64>,
    targets: &[Target],
    family: &ModelFamily,
    params: &CvParams,
    experiment: &str,
) -> Result<CvReport> {
    let (n, p) = x.dim();
    let k = params.folds;
    if k < 2 || n < 2 * k {
        return Err(Error::InvalidInput(format!("{k}-fold cross-validation needs at least {} rows, got {n}", 2 * k)));
    }
    if y.nrows() != n || y.ncols() != targets.len() {
        return Err(Error::InvalidInput("target matrix does not match rows or target list".into()));
    }
    let labels: Vec<String> = (0..p).map(|j| j.to_string()).collect();
    let jobs: Vec<(usize, usize)> = (0..params.repeats).flat_map(|r| (0..k).map(move |f| (r, f))).collect();
    let folds: Vec<Vec<Vec<usize>>> = (0..params.repeats).map(|r| fold_indices(n, k, r, params.seed)).collect();

    let per_job: Vec<Vec<Option<f64>>> = jobs
        .par_iter()
        .map(|&(r, f)| {
            let test = &folds[r][f];
            let mut is_test = vec![false; n];
            test.iter().for_each(|&i| is_test[i] = true);
            let train: Vec<usize> = (0..n).filter(|&i| !is_test[i]).collect();
            let x_train = x.select(Axis(0), &train);
            let norm = NormalizationParams::fit(x_train.view(), &labels);
            let x_train = norm.apply(x_train.view());
            let x_test = norm.apply(x.select(Axis(0), test).view());
            targets
                .iter()
                .enumerate()
                .map(|(j, t)| {
                    let y_train: Vec<f64> = train.iter().map(|&i| y[[i, j]]).collect();
                    let y_test: Vec<f64> = test.iter().map(|&i| y[[i, j]]).collect();
                    let seed = derive_seed(params.seed, &[r as u64, f as u64, 1000 + t.index() as u64]);
                    let model: FittedModel = family.fit(x_train.view(), &y_train, seed)?;
                    let pred = model.predict(x_test.view());
                    match pearson(&pred, &y_test) {
                        Ok(v) => Ok(Some(v)),
                        Err(Error::UndefinedCorrelation) => Ok(None),
                        Err(e) => Err(e),
                    }
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let targets = targets
        .iter()
        .enumerate()
        .map(|(j, &t)| summarize(t, per_job.iter().map(|row| row[j]).collect()))
        .collect();
    Ok(CvReport {
        experiment: experiment.to_string(),
        seed: params.seed,
        folds: k,
        repeats: params.repeats,
        targets,
    })
}

/// The base experiment with the highest mean r; earlier entries win ties
/// and NaN scores never win.
pub fn best_base(scores: &[(ExperimentId, f64)]) -> Option<ExperimentId> {
    let mut best: Option<(ExperimentId, f64)> = None;
    for &(id, s) in scores {
        if s.is_nan() {
            continue;
        }
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((id, s));
        }
    }
    best.map(|(id, _)| id)
}
