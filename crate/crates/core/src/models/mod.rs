//! Regressors, cross-validation and correlation statistics.

mod cv;
mod elasticnet;
mod forest;
mod stats;
mod tree;

pub use cv::{best_base, cross_validate, fold_indices, permute_rows, summarize, CvParams, CvReport, TargetCv};
pub use elasticnet::{objective, train_elasticnet, ElasticNetModel, ElasticNetParams};
pub use forest::{train_forest, ForestParams, RandomForestModel};
pub use stats::{
    average_ranks, correlation_screen, pearson, spearman, spearman_permutation, t_test_p, PValueMethod, ScreenRow,
    SpearmanResult,
};
pub use tree::{train_tree, Node, RegressionTree, TreeParams};

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::Result;

/// Anything that maps a feature row to a real prediction.
pub trait Regressor {
    fn predict_row(&self, x: &[f64]) -> f64;

    fn predict(&self, x: ArrayView2<f64>) -> Vec<f64> {
        x.rows().into_iter().map(|r| self.predict_row(&r.to_vec())).collect()
    }
}

impl Regressor for RandomForestModel {
    fn predict_row(&self, x: &[f64]) -> f64 {
        RandomForestModel::predict_row(self, x)
    }
}

impl Regressor for ElasticNetModel {
    fn predict_row(&self, x: &[f64]) -> f64 {
        ElasticNetModel::predict_row(self, x)
    }
}

impl Regressor for RegressionTree {
    fn predict_row(&self, x: &[f64]) -> f64 {
        RegressionTree::predict_row(self, x)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModelFamily {
    Forest(ForestParams),
    ElasticNet(ElasticNetParams),
}

#[derive(Clone, Debug, PartialEq)]
pub enum FittedModel {
    Forest(RandomForestModel),
    ElasticNet(ElasticNetModel),
}

impl ModelFamily {
    /// Fit on `x`, `y`; a forest takes `seed` in place of its own.
    pub fn fit(&self, x: ArrayView2<f64>, y: &[f64], seed: u64) -> Result<FittedModel> {
        Ok(match self {
            ModelFamily::Forest(p) => FittedModel::Forest(train_forest(x, y, &ForestParams { seed, ..p.clone() })?),
            ModelFamily::ElasticNet(p) => FittedModel::ElasticNet(train_elasticnet(x, y, p)?),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelFamily::Forest(_) => "forest",
            ModelFamily::ElasticNet(_) => "elastic_net",
        }
    }
}

impl Regressor for FittedModel {
    fn predict_row(&self, x: &[f64]) -> f64 {
        match self {
            FittedModel::Forest(m) => m.predict_row(x),
            FittedModel::ElasticNet(m) => m.predict_row(x),
        }
    }
}

impl FittedModel {
    pub fn to_bytes(&self) -> Vec<u8> {
        match self {
            FittedModel::Forest(m) => m.to_bytes(),
            FittedModel::ElasticNet(m) => m.to_bytes(),
        }
    }
}
