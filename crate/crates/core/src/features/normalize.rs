use ndarray::{Array2, ArrayView2, Axis};

use crate::{Error, Result};

/// Columns with a smaller standard deviation are mapped to zero.
pub const MIN_SD: f64 = 1e-12;

/// Per-column mean and population standard deviation.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizationParams {
    pub labels: Vec<String>,
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

impl NormalizationParams {
    pub fn fit(x: ArrayView2<f64>, labels: &[String]) -> Self {
        let n = x.nrows().max(1) as f64;
        let mut mean = Vec::with_capacity(x.ncols());
        let mut sd = Vec::with_capacity(x.ncols());
        for col in x.axis_iter(Axis(1)) {
            let m = col.sum() / n;
            let var = col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n;
            mean.push(m);
            sd.push(var.sqrt());
        }
        NormalizationParams {
            labels: labels.to_vec(),
            mean,
            sd,
        }
    }

    pub fn apply(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let mut out = x.to_owned();
        for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
            let (m, s) = (self.mean[j], self.sd[j]);
            if s < MIN_SD {
                col.fill(0.0);
            } else {
                col.mapv_inplace(|v| (v - m) / s);
            }
        }
        out
    }

    /// `label.mean = value` / `label.sd = value` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (j, l) in self.labels.iter().enumerate() {
            out.push_str(&format!("{l}.mean = {}\n{l}.sd = {}\n", self.mean[j], self.sd[j]));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut p = NormalizationParams {
            labels: Vec::new(),
            mean: Vec::new(),
            sd: Vec::new(),
        };
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let bad = || Error::InvalidInput(format!("normalisation line {}: `{line}`", i + 1));
            let (key, value) = line.split_once('=').ok_or_else(bad)?;
            let (label, field) = key.trim().rsplit_once('.').ok_or_else(bad)?;
            let v: f64 = value.trim().parse().map_err(|_| bad())?;
            match field {
                "mean" => {
                    p.labels.push(label.to_string());
                    p.mean.push(v);
                }
                "sd" if p.labels.last().map(String::as_str) == Some(label) && p.sd.len() + 1 == p.labels.len() => {
                    p.sd.push(v)
                }
                _ => return Err(bad()),
            }
        }
        if p.sd.len() != p.labels.len() {
            return Err(Error::InvalidInput("normalisation file ends without a final sd line".into()));
        }
        Ok(p)
    }
}
