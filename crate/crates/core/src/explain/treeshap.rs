//! Path-dependent tree SHAP (polynomial-time exact algorithm).
//!
//! The recursion carries the set of features seen on the path from the root
//! together with the fraction of "zero" (feature absent, follow covers) and
//! "one" (feature present, follow x) paths, and the permutation weights of
//! every subset size. Repeated splits on one feature are first unwound so
//! each feature appears at most once on the path.

use crate::models::{RandomForestModel, RegressionTree};
use crate::{Error, Result};

use super::ShapExplanation;

#[derive(Clone, Copy, Debug, Default)]
struct PathElement {
    feature: isize,
    zero: f64,
    one: f64,
    pweight: f64,
}

fn extend(path: &mut [PathElement], ud: usize, zero: f64, one: f64, feature: isize) {
    path[ud] = PathElement {
        feature,
        zero,
        one,
        pweight: if ud == 0 { 1.0 } else { 0.0 },
    };
    let d = (ud + 1) as f64;
    for i in (0..ud).rev() {
        path[i + 1].pweight += one * path[i].pweight * (i + 1) as f64 / d;
        path[i].pweight = zero * path[i].pweight * (ud - i) as f64 / d;
    }
}

fn unwind(path: &mut [PathElement], ud: usize, pi: usize) {
    let (one, zero) = (path[pi].one, path[pi].zero);
    let d = (ud + 1) as f64;
    let mut next = path[ud].pweight;
    for i in (0..ud).rev() {
        if one != 0.0 {
            let tmp = path[i].pweight;
            path[i].pweight = next * d / ((i + 1) as f64 * one);
            next = tmp - path[i].pweight * zero * (ud - i) as f64 / d;
        } else {
            path[i].pweight = path[i].pweight * d / (zero * (ud - i) as f64);
        }
    }
    for i in pi..ud {
        path[i].feature = path[i + 1].feature;
        path[i].zero = path[i + 1].zero;
        path[i].one = path[i + 1].one;
    }
}

/// Total permutation weight of the path with element `pi` removed.
fn unwound_sum(path: &[PathElement], ud: usize, pi: usize) -> f64 {
    let (one, zero) = (path[pi].one, path[pi].zero);
    let d = (ud + 1) as f64;
    let mut next = path[ud].pweight;
    let mut total = 0.0;
    for i in (0..ud).rev() {
        if one != 0.0 {
            let tmp = next * d / ((i + 1) as f64 * one);
            total += tmp;
            next = path[i].pweight - tmp * zero * ((ud - i) as f64 / d);
        } else {
            total += (path[i].pweight / zero) / ((ud - i) as f64 / d);
        }
    }
    total
}

struct Walker<'a> {
    tree: &'a RegressionTree,
    x: &'a [f64],
    phi: &'a mut [f64],
    buf: Vec<PathElement>,
}

impl Walker<'_> {
    #[allow(clippy::too_many_arguments)]
    fn recurse(&mut self, node: usize, parent: usize, ud: usize, zero: f64, one: f64, feature: isize) {
        let start = parent + ud + 1;
        self.buf.copy_within(parent..parent + ud + 1, start);
        extend(&mut self.buf[start..], ud, zero, one, feature);
        let n = &self.tree.nodes[node];
        let Some(f) = n.feature else {
            for i in 1..=ud {
                let w = unwound_sum(&self.buf[start..], ud, i);
                let el = self.buf[start + i];
                self.phi[el.feature as usize] += w * (el.one - el.zero) * n.value;
            }
            return;
        };
        let (hot, cold) = if self.x[f] <= n.threshold {
            (n.left, n.right)
        } else {
            (n.right, n.left)
        };
        let hot_zero = self.tree.nodes[hot].cover / n.cover;
        let cold_zero = self.tree.nodes[cold].cover / n.cover;
        let (mut in_zero, mut in_one) = (1.0, 1.0);
        let mut ud = ud;
        if let Some(pi) = (0..=ud).find(|&i| self.buf[start + i].feature == f as isize) {
            in_zero = self.buf[start + pi].zero;
            in_one = self.buf[start + pi].one;
            unwind(&mut self.buf[start..], ud, pi);
            ud -= 1;
        }
        self.recurse(hot, start, ud + 1, hot_zero * in_zero, in_one, f as isize);
        self.recurse(cold, start, ud + 1, cold_zero * in_zero, 0.0, f as isize);
    }
}

/// Cover-weighted mean of the leaf values.
pub fn expected_value(tree: &RegressionTree) -> f64 {
    let root = tree.nodes[0].cover;
    tree.nodes
        .iter()
        .filter(|n| n.is_leaf())
        .map(|n| n.cover / root * n.value)
        .sum()
}

pub(crate) fn check_covers(tree: &RegressionTree, index: usize) -> Result<()> {
    for n in &tree.nodes {
        if !(n.cover.is_finite() && n.cover > 0.0) {
            return Err(Error::MissingCover { tree: index });
        }
    }
    Ok(())
}

/// Add the SHAP values of one tree for `x` into `phi`.
pub fn tree_shap_single(tree: &RegressionTree, x: &[f64], phi: &mut [f64]) {
    let depth = tree.depth();
    let size = (depth + 3) * (depth + 4) / 2 + depth + 4;
    let mut w = Walker {
        tree,
        x,
        phi,
        buf: vec![PathElement::default(); size],
    };
    w.recurse(0, 0, 0, 1.0, 1.0, -1);
}

/// Exact path-dependent SHAP values of a forest: per-tree values summed and
/// divided by the number of trees.
pub fn tree_shap(forest: &RandomForestModel, x: &[f64]) -> Result<ShapExplanation> {
    let p = forest.n_features;
    if x.len() != p {
        return Err(Error::InvalidInput(format!("instance has {} features, model expects {p}", x.len())));
    }
    let mut phi = vec![0.0; p];
    let mut base = 0.0;
    for (i, t) in forest.trees.iter().enumerate() {
        check_covers(t, i)?;
        tree_shap_single(t, x, &mut phi);
        base += expected_value(t);
    }
    let m = forest.trees.len() as f64;
    phi.iter_mut().for_each(|v| *v /= m);
    Ok(ShapExplanation {
        instance: 0,
        phi,
        base_value: base / m,
        prediction: forest.predict_row(x),
    })
}
