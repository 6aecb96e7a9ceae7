//! Pearson and Spearman correlation and the significance screen.

use ndarray::ArrayView2;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::util::stream_rng;
use crate::{Error, Result};

fn check_len(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() || a.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "correlation needs two equal-length samples of at least 3 (got {} and {})",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

/// Product-moment correlation.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    check_len(a, b)?;
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::UndefinedCorrelation);
    }
    Ok((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// 1-based ranks with ties given their average rank.
pub fn average_ranks(a: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..a.len()).collect();
    idx.sort_by(|&i, &j| a[i].total_cmp(&a[j]));
    let mut ranks = vec![0.0; a.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && a[idx[end]] == a[idx[start]] {
            end += 1;
        }
        let r = (start + end + 1) as f64 / 2.0;
        for &i in &idx[start..end] {
            ranks[i] = r;
        }
        start = end;
    }
    ranks
}

/// Two-sided p-value of a correlation under the t approximation with
/// `n - 2` degrees of freedom.
pub fn t_test_p(r: f64, n: usize) -> f64 {
    if r.abs() >= 1.0 {
        return 0.0;
    }
    if n <= 2 {
        return 1.0;
    }
    let df = (n - 2) as f64;
    let t = r * (df / (1.0 - r * r)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    (2.0 * dist.sf(t.abs())).min(1.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpearmanResult {
    pub rho: f64,
    pub p_value: f64,
}

/// Spearman's rho with a t-approximation p-value.
pub fn spearman(a: &[f64], b: &[f64]) -> Result<SpearmanResult> {
    check_len(a, b)?;
    let rho = pearson(&average_ranks(a), &average_ranks(b))?;
    Ok(SpearmanResult {
        rho,
        p_value: t_test_p(rho, a.len()),
    })
}

/// Permutation p-value for Spearman's rho: `(1 + hits) / (draws + 1)` where a
/// hit is a shuffled |rho| at least as large as the observed one.
pub fn spearman_permutation(a: &[f64], b: &[f64], draws: usize, seed: u64) -> Result<SpearmanResult> {
    check_len(a, b)?;
    let ra = average_ranks(a);
    let mut rb = average_ranks(b);
    let rho = pearson(&ra, &rb)?;
    let mut rng = stream_rng(seed, 0);
    let mut hits = 0usize;
    for _ in 0..draws {
        rb.shuffle(&mut rng);
        if pearson(&ra, &rb)?.abs() >= rho.abs() - 1e-12 {
            hits += 1;
        }
    }
    Ok(SpearmanResult {
        rho,
        p_value: (1 + hits) as f64 / (draws + 1) as f64,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum PValueMethod {
    TDist,
    Permutation { draws: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScreenRow {
    pub feature: String,
    pub target: String,
    pub rho: f64,
    pub p_value: f64,
}

/// Spearman rho for every feature/target pair, keeping those with
/// `p <= alpha`. Pairs with an undefined rho (a constant column) are skipped.
pub fn correlation_screen(
    x: ArrayView2<f64>,
    features: &[String],
    y: ArrayView2<f64>,
    targets: &[String],
    alpha: f64,
    method: PValueMethod,
) -> Result<Vec<ScreenRow>> {
    let mut out = Vec::new();
    for (j, fname) in features.iter().enumerate() {
        let a = x.column(j).to_vec();
        for (t, tname) in targets.iter().enumerate() {
            let b = y.column(t).to_vec();
            let res = match method {
                PValueMethod::TDist => spearman(&a, &b),
                PValueMethod::Permutation { draws, seed } => {
                    spearman_permutation(&a, &b, draws, crate::util::derive_seed(seed, &[j as u64, t as u64]))
                }
            };
            match res {
                Ok(r) if r.p_value <= alpha => out.push(ScreenRow {
                    feature: fname.clone(),
                    target: tname.clone(),
                    rho: r.rho,
                    p_value: r.p_value,
                }),
                Ok(_) | Err(Error::UndefinedCorrelation) => {}
                Err(e) => return Err(e),
            }
        }
    }
    Ok(out)
}
