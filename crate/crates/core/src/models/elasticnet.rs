//! Elastic net by cyclic coordinate descent.
//!
//! Minimises `(1/2n)|y - b - Xw|^2 + lambda * (mix * |w|_1 + (1 - mix)/2 * |w|^2)`
//! with an unpenalised intercept `b`.

use std::fs;
use std::path::Path;

use ndarray::{ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const MAGIC: &str = "MORALENS-ENET 1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ElasticNetParams {
    pub lambda: f64,
    pub mix: f64,
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for ElasticNetParams {
    fn default() -> Self {
        ElasticNetParams {
            lambda: 0.1,
            mix: 0.5,
            tol: 1e-6,
            max_sweeps: 10_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElasticNetModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub lambda: f64,
    pub mix: f64,
    pub sweeps: usize,
    /// Objective after each sweep.
    #[serde(default)]
    pub objective_trace: Vec<f64>,
}

fn soft_threshold(z: f64, g: f64) -> f64 {
    if z > g {
        z - g
    } else if z < -g {
        z + g
    } else {
        0.0
    }
}

pub fn objective(x: ArrayView2<f64>, y: &[f64], w: &[f64], b: f64, lambda: f64, mix: f64) -> f64 {
    let n = y.len() as f64;
    let rss: f64 = x
        .rows()
        .into_iter()
        .zip(y)
        .map(|(row, &yi)| {
            let r = yi - b - row.dot(&ArrayView1::from(w));
            r * r
        })
        .sum();
    let l1: f64 = w.iter().map(|v| v.abs()).sum();
    let l2: f64 = w.iter().map(|v| v * v).sum();
    rss / (2.0 * n) + lambda * (mix * l1 + (1.0 - mix) / 2.0 * l2)
}

pub fn train_elasticnet(x: ArrayView2<f64>, y: &[f64], params: &ElasticNetParams) -> Result<ElasticNetModel> {
    let (n, p) = x.dim();
    if n == 0 || n != y.len() {
        return Err(Error::InvalidInput(format!("elastic net needs matching non-empty X ({n} rows) and y ({})", y.len())));
    }
    if params.lambda < 0.0 || !(0.0..=1.0).contains(&params.mix) {
        return Err(Error::InvalidInput("lambda must be >= 0 and mix in [0, 1]".into()));
    }
    let nf = n as f64;
    let (lambda, mix) = (params.lambda, params.mix);
    let sq: Vec<f64> = x.axis_iter(Axis(1)).map(|c| c.dot(&c) / nf).collect();
    let mut w = vec![0.0; p];
    let mut b = y.iter().sum::<f64>() / nf;
    let mut r: Vec<f64> = y.iter().map(|v| v - b).collect();
    let mut trace = Vec::new();

    for sweep in 1..=params.max_sweeps {
        let mut max_change: f64 = 0.0;
        for j in 0..p {
            let col = x.column(j);
            let old = w[j];
            let new = if sq[j] == 0.0 {
                0.0
            } else {
                let rho = col.iter().zip(&r).map(|(a, ri)| a * ri).sum::<f64>() / nf + sq[j] * old;
                soft_threshold(rho, lambda * mix) / (sq[j] + lambda * (1.0 - mix))
            };
            let delta = new - old;
            if delta != 0.0 {
                for (ri, a) in r.iter_mut().zip(col) {
                    *ri -= a * delta;
                }
                w[j] = new;
            }
            max_change = max_change.max(delta.abs());
        }
        let shift = r.iter().sum::<f64>() / nf;
        if shift != 0.0 {
            r.iter_mut().for_each(|ri| *ri -= shift);
            b += shift;
        }
        max_change = max_change.max(shift.abs());
        trace.push(objective(x, y, &w, b, lambda, mix));
        if max_change < params.tol {
            return Ok(ElasticNetModel {
                weights: w,
                intercept: b,
                lambda,
                mix,
                sweeps: sweep,
                objective_trace: trace,
            });
        }
    }
    Err(Error::NotConverged {
        sweeps: params.max_sweeps,
        objective: trace.last().copied().unwrap_or(f64::NAN),
    })
}

impl ElasticNetModel {
    pub fn predict_row(&self, x: &[f64]) -> f64 {
        self.intercept + self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Vec<f64> {
        x.rows().into_iter().map(|r| self.predict_row(&r.to_vec())).collect()
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
        serde_json::from_str(body).map_err(|e| Error::Archive(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        ElasticNetModel::from_bytes(&bytes)
    }
}
