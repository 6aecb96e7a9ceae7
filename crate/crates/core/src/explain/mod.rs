//! Exact tree SHAP, its enumeration oracle, permutation importance and
//! grouped contributions.

mod brute;
mod group;
mod importance;
mod treeshap;

pub use brute::{brute_shapley, conditional_expectation, MAX_BRUTE_FEATURES};
pub use group::{rank_and_group, GroupContribution, GroupedExplanation, RankedFeature};
pub use importance::{permutation_importance, Importance};
pub use treeshap::{expected_value, tree_shap, tree_shap_single};

use ndarray::{ArrayView2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::features::{FeatureGroup, GroupKind, NormalizationParams};
use crate::models::{fold_indices, train_forest, ForestParams, RandomForestModel};
use crate::util::derive_seed;
use crate::{Error, Result};

/// Additive attribution of one prediction: `base_value + Σ phi = prediction`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapExplanation {
    pub instance: usize,
    pub phi: Vec<f64>,
    pub base_value: f64,
    pub prediction: f64,
}

impl ShapExplanation {
    /// `|base_value + Σ phi - prediction|`.
    pub fn additivity_gap(&self) -> f64 {
        (self.base_value + self.phi.iter().sum::<f64>() - self.prediction).abs()
    }
}

/// Explain every row of `x`; `ids[i]` becomes the instance id of row `i`.
pub fn explain_rows(forest: &RandomForestModel, x: ArrayView2<f64>, ids: &[usize]) -> Result<Vec<ShapExplanation>> {
    if ids.len() != x.nrows() {
        return Err(Error::InvalidInput(format!("{} ids for {} rows", ids.len(), x.nrows())));
    }
    (0..x.nrows())
        .into_par_iter()
        .map(|i| {
            let mut e = tree_shap(forest, &x.row(i).to_vec())?;
            e.instance = ids[i];
            Ok(e)
        })
        .collect()
}

/// Attributions for every row from the fold model that did not see it.
/// Folds come from repeat 0 of [`fold_indices`]; features are normalised
/// with training-fold statistics. Output is ordered by row.
pub fn out_of_fold_shap(
    x: ArrayView2<f64>,
    y: &[f64],
    params: &ForestParams,
    folds: usize,
    seed: u64,
) -> Result<Vec<ShapExplanation>> {
    let n = x.nrows();
    if y.len() != n {
        return Err(Error::InvalidInput(format!("{n} rows but {} targets", y.len())));
    }
    if folds < 2 || n < 2 * folds {
        return Err(Error::InvalidInput(format!("{folds} folds need at least {} rows, got {n}", 2 * folds)));
    }
    let labels: Vec<String> = (0..x.ncols()).map(|j| j.to_string()).collect();
    let mut out = Vec::with_capacity(n);
    for (f, test) in fold_indices(n, folds, 0, seed).iter().enumerate() {
        let mut is_test = vec![false; n];
        test.iter().for_each(|&i| is_test[i] = true);
        let train: Vec<usize> = (0..n).filter(|&i| !is_test[i]).collect();
        let x_train = x.select(Axis(0), &train);
        let norm = NormalizationParams::fit(x_train.view(), &labels);
        let y_train: Vec<f64> = train.iter().map(|&i| y[i]).collect();
        let model = train_forest(
            norm.apply(x_train.view()).view(),
            &y_train,
            &ForestParams {
                seed: derive_seed(seed, &[f as u64]),
                ..params.clone()
            },
        )?;
        let x_test = norm.apply(x.select(Axis(0), test).view());
        out.extend(explain_rows(&model, x_test.view(), test)?);
    }
    out.sort_by_key(|e| e.instance);
    Ok(out)
}

/// Column blocks for [`rank_and_group`], in [`GroupKind`] order, skipping
/// kinds without columns.
pub fn group_map(columns: &[FeatureGroup]) -> Vec<(String, Vec<usize>)> {
    let mut kinds: Vec<GroupKind> = columns.iter().map(|g| g.kind()).collect();
    kinds.sort();
    kinds.dedup();
    kinds
        .into_iter()
        .map(|k| {
            let cols = columns.iter().enumerate().filter(|(_, g)| g.kind() == k).map(|(j, _)| j).collect();
            (k.name().to_string(), cols)
        })
        .collect()
}
