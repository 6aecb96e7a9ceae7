use std::fs;
use std::path::Path;

use ndarray::ArrayView2;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{train_tree, RegressionTree, TreeParams};
use crate::util::stream_rng;
use crate::{Error, Result};

const MAGIC: &str = "MORALENS-FOREST 1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Features tried per split; `None` means `ceil(p / 3)`.
    pub mtry: Option<usize>,
    pub min_leaf: usize,
    pub max_depth: Option<usize>,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 500,
            mtry: None,
            min_leaf: 5,
            max_depth: None,
            bootstrap: true,
            seed: 0,
        }
    }
}

impl ForestParams {
    pub fn tree_params(&self, p: usize) -> TreeParams {
        TreeParams {
            mtry: self.mtry.unwrap_or(p.div_ceil(3)).max(1),
            min_leaf: self.min_leaf,
            max_depth: self.max_depth,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomForestModel {
    pub trees: Vec<RegressionTree>,
    pub params: ForestParams,
    pub n_features: usize,
}

/// Tree `i` draws its bootstrap sample and feature subsets from stream `i`
/// of the master seed, so the forest does not depend on thread scheduling.
pub fn train_forest(x: ArrayView2<f64>, y: &[f64], params: &ForestParams) -> Result<RandomForestModel> {
    let n = x.nrows();
    if n == 0 || n != y.len() {
        return Err(Error::InvalidInput(format!("forest needs matching non-empty X ({n} rows) and y ({})", y.len())));
    }
    if params.n_trees == 0 {
        return Err(Error::InvalidInput("forest needs at least one tree".into()));
    }
    let tp = params.tree_params(x.ncols());
    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(params.seed, i as u64);
            let rows: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            train_tree(x, y, &rows, &tp, &mut rng)
        })
        .collect();
    Ok(RandomForestModel {
        trees,
        params: params.clone(),
        n_features: x.ncols(),
    })
}

impl RandomForestModel {
    pub fn predict_row(&self, x: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict_row(x)).sum::<f64>() / self.trees.len() as f64
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Vec<f64> {
        x.rows()
            .into_iter()
            .map(|r| self.predict_row(&r.to_vec()))
            .collect()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = format!("{MAGIC}\n").into_bytes();
        out.extend(serde_json::to_vec(self).expect("forest serialises"));
        out.push(b'\n');
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let text = std::str::from_utf8(bytes).map_err(|e| Error::Archive(e.to_string()))?;
        let body = text
            .strip_prefix(MAGIC)
            .and_then(|b| b.strip_prefix('\n'))
            .ok_or_else(|| Error::Archive(format!("missing `{MAGIC}` header")))?;
        serde_json::from_str(body).map_err(|e| Error::Archive(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        RandomForestModel::from_bytes(&bytes)
    }
}
