//! Shapley values by enumerating every coalition, using the same
//! cover-weighted conditional expectation that tree SHAP assumes.

use crate::models::{RandomForestModel, RegressionTree};
use crate::{Error, Result};

use super::treeshap::check_covers;

/// Largest feature count accepted by [`brute_shapley`].
pub const MAX_BRUTE_FEATURES: usize = 15;

/// Expected tree output when only the features in `mask` are known: known
/// features follow `x`, unknown ones average both children by cover.
pub fn conditional_expectation(tree: &RegressionTree, x: &[f64], mask: u32) -> f64 {
    fn go(t: &RegressionTree, i: usize, x: &[f64], mask: u32) -> f64 {
        let n = &t.nodes[i];
        match n.feature {
            None => n.value,
            Some(f) if mask & (1 << f) != 0 => {
                go(t, if x[f] <= n.threshold { n.left } else { n.right }, x, mask)
            }
            Some(_) => {
                let (l, r) = (&t.nodes[n.left], &t.nodes[n.right]);
                (l.cover * go(t, n.left, x, mask) + r.cover * go(t, n.right, x, mask)) / n.cover
            }
        }
    }
    go(tree, 0, x, mask)
}

/// Exact Shapley values over all `2^p` coalitions.
pub fn brute_shapley(forest: &RandomForestModel, x: &[f64]) -> Result<Vec<f64>> {
    let p = forest.n_features;
    if p > MAX_BRUTE_FEATURES {
        return Err(Error::TooManyFeatures {
            p,
            max: MAX_BRUTE_FEATURES,
        });
    }
    if x.len() != p {
        return Err(Error::InvalidInput(format!("instance has {} features, model expects {p}", x.len())));
    }
    for (i, t) in forest.trees.iter().enumerate() {
        check_covers(t, i)?;
    }
    let m = forest.trees.len() as f64;
    let value: Vec<f64> = (0..1u32 << p)
        .map(|mask| forest.trees.iter().map(|t| conditional_expectation(t, x, mask)).sum::<f64>() / m)
        .collect();
    // weight[s] = s! (p - s - 1)! / p!
    let mut fact = vec![1.0f64; p + 1];
    for i in 1..=p {
        fact[i] = fact[i - 1] * i as f64;
    }
    let mut phi = vec![0.0; p];
    for (i, out) in phi.iter_mut().enumerate() {
        let bit = 1u32 << i;
        for mask in 0..1u32 << p {
            if mask & bit != 0 {
                continue;
            }
            let s = mask.count_ones() as usize;
            let w = fact[s] * fact[p - s - 1] / fact[p];
            *out += w * (value[(mask | bit) as usize] - value[mask as usize]);
        }
    }
    Ok(phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{ForestParams, Node};

    #[test]
    fn constant_model_gets_zero() {
        let f = RandomForestModel {
            trees: vec![RegressionTree {
                nodes: vec![Node::leaf(2.0, 4.0)],
            }],
            params: ForestParams::default(),
            n_features: 3,
        };
        assert_eq!(brute_shapley(&f, &[1.0, 2.0, 3.0]).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn too_many_features_refused() {
        let f = RandomForestModel {
            trees: vec![],
            params: ForestParams::default(),
            n_features: 16,
        };
        assert!(matches!(brute_shapley(&f, &[0.0; 16]), Err(Error::TooManyFeatures { p: 16, max: 15 })));
    }
}
