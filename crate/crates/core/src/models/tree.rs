//! CART regression trees grown by variance reduction.

use ndarray::ArrayView2;
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// A tree node. Internal nodes have `feature = Some(..)`; every node keeps
/// the mean target and the number of training samples that reached it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub feature: Option<usize>,
    pub threshold: f64,
    pub left: usize,
    pub right: usize,
    pub value: f64,
    pub cover: f64,
}

impl Node {
    pub fn leaf(value: f64, cover: f64) -> Self {
        Node {
            feature: None,
            threshold: 0.0,
            left: 0,
            right: 0,
            value,
            cover,
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.feature.is_none()
    }
}

/// Nodes in creation order; the root is node 0. Samples with
/// `x[feature] <= threshold` go left.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<Node>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    /// Non-constant features evaluated per split.
    pub mtry: usize,
    pub min_leaf: usize,
    pub max_depth: Option<usize>,
}

impl RegressionTree {
    pub fn predict_row(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            let n = &self.nodes[i];
            match n.feature {
                None => return n.value,
                Some(f) => i = if x[f] <= n.threshold { n.left } else { n.right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(t: &RegressionTree, i: usize) -> usize {
            let n = &t.nodes[i];
            if n.is_leaf() {
                0
            } else {
                1 + go(t, n.left).max(go(t, n.right))
            }
        }
        go(self, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_leaf()).count()
    }

    /// Features used by at least one split.
    pub fn used_features(&self) -> Vec<usize> {
        let mut f: Vec<usize> = self.nodes.iter().filter_map(|n| n.feature).collect();
        f.sort_unstable();
        f.dedup();
        f
    }
}

struct Split {
    feature: usize,
    threshold: f64,
    /// Number of samples going left once sorted by the feature.
    n_left: usize,
    gain: f64,
}

/// Best variance-reducing split of `rows` on feature `f`, if any.
fn best_split_on(x: ArrayView2<f64>, y: &[f64], rows: &mut [usize], f: usize, min_leaf: usize) -> Option<Split> {
    rows.sort_by(|&a, &b| x[[a, f]].total_cmp(&x[[b, f]]).then(a.cmp(&b)));
    let n = rows.len();
    let total: f64 = rows.iter().map(|&r| y[r]).sum();
    let mut left_sum = 0.0;
    let mut best: Option<Split> = None;
    for i in 0..n - 1 {
        left_sum += y[rows[i]];
        let nl = i + 1;
        let nr = n - nl;
        let (a, b) = (x[[rows[i], f]], x[[rows[i + 1], f]]);
        if nl < min_leaf || nr < min_leaf || a == b {
            continue;
        }
        let ml = left_sum / nl as f64;
        let mr = (total - left_sum) / nr as f64;
        let gain = (nl * nr) as f64 / n as f64 * (ml - mr) * (ml - mr);
        if gain > 0.0 && best.as_ref().is_none_or(|s| gain > s.gain) {
            let mid = a + (b - a) / 2.0;
            best = Some(Split {
                feature: f,
                threshold: if mid < b { mid } else { a },
                n_left: nl,
                gain,
            });
        }
    }
    best
}

/// Grow a tree on the sample multiset `rows` (repeats allowed).
pub fn train_tree(
    x: ArrayView2<f64>,
    y: &[f64],
    rows: &[usize],
    params: &TreeParams,
    rng: &mut ChaCha8Rng,
) -> RegressionTree {
    let p = x.ncols();
    let min_leaf = params.min_leaf.max(1);
    let mtry = params.mtry.clamp(1, p.max(1));
    let mut nodes: Vec<Node> = Vec::new();
    // (node index, rows, depth)
    let mut stack: Vec<(usize, Vec<usize>, usize)> = Vec::new();
    let mean = |rs: &[usize]| rs.iter().map(|&r| y[r]).sum::<f64>() / rs.len() as f64;
    nodes.push(Node::leaf(mean(rows), rows.len() as f64));
    stack.push((0, rows.to_vec(), 0));
    let mut order: Vec<usize> = (0..p).collect();

    while let Some((id, mut rs, depth)) = stack.pop() {
        let n = rs.len();
        let depth_ok = params.max_depth.is_none_or(|d| depth < d);
        let first = y[rs[0]];
        if n < 2 * min_leaf || !depth_ok || rs.iter().all(|&r| y[r] == first) {
            continue;
        }
        order.shuffle(rng);
        let mut best: Option<Split> = None;
        let mut tried = 0;
        for &f in &order {
            if tried == mtry {
                break;
            }
            let v0 = x[[rs[0], f]];
            if rs.iter().all(|&r| x[[r, f]] == v0) {
                continue;
            }
            tried += 1;
            if let Some(s) = best_split_on(x, y, &mut rs, f, min_leaf) {
                if best.as_ref().is_none_or(|b| s.gain > b.gain) {
                    best = Some(s);
                }
            }
        }
        let Some(split) = best else { continue };
        rs.sort_by(|&a, &b| x[[a, split.feature]].total_cmp(&x[[b, split.feature]]).then(a.cmp(&b)));
        let right_rows = rs.split_off(split.n_left);
        let left_rows = rs;
        let l = nodes.len();
        nodes.push(Node::leaf(mean(&left_rows), left_rows.len() as f64));
        nodes.push(Node::leaf(mean(&right_rows), right_rows.len() as f64));
        let node = &mut nodes[id];
        node.feature = Some(split.feature);
        node.threshold = split.threshold;
        node.left = l;
        node.right = l + 1;
        stack.push((l + 1, right_rows, depth + 1));
        stack.push((l, left_rows, depth + 1));
    }
    RegressionTree { nodes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::stream_rng;
    use ndarray::Array2;

    fn params(min_leaf: usize) -> TreeParams {
        TreeParams {
            mtry: 1,
            min_leaf,
            max_depth: None,
        }
    }

    #[test]
    fn constant_target_gives_single_leaf() {
        let x = Array2::from_shape_fn((10, 1), |(i, _)| i as f64);
        let y = vec![2.5; 10];
        let rows: Vec<usize> = (0..10).collect();
        let t = train_tree(x.view(), &y, &rows, &params(1), &mut stream_rng(1, 0));
        assert_eq!(t.nodes.len(), 1);
        assert_eq!(t.predict_row(&[3.0]), 2.5);
    }

    #[test]
    fn step_function_splits_between_classes() {
        let xs = [0.05, 0.2, 0.31, 0.5, 0.52, 0.7, 0.93];
        let x = Array2::from_shape_fn((xs.len(), 1), |(i, _)| xs[i]);
        let y: Vec<f64> = xs.iter().map(|&v| f64::from(u8::from(v > 0.5))).collect();
        let rows: Vec<usize> = (0..xs.len()).collect();
        let t = train_tree(x.view(), &y, &rows, &params(1), &mut stream_rng(1, 0));
        assert_eq!(t.nodes[0].feature, Some(0));
        assert!(t.nodes[0].threshold >= 0.5 && t.nodes[0].threshold < 0.52);
        assert_eq!(t.n_leaves(), 2);
    }

    #[test]
    fn min_leaf_equal_to_n_gives_single_leaf() {
        let x = Array2::from_shape_fn((8, 2), |(i, j)| (i * (j + 3) % 5) as f64);
        let y: Vec<f64> = (0..8).map(|i| ((i * 7) % 3) as f64).collect();
        let rows: Vec<usize> = (0..8).collect();
        let t = train_tree(x.view(), &y, &rows, &params(8), &mut stream_rng(1, 0));
        assert_eq!(t.nodes.len(), 1);
        assert_eq!(t.nodes[0].value, y.iter().sum::<f64>() / 8.0);
    }

    #[test]
    fn covers_add_up() {
        let x = Array2::from_shape_fn((40, 3), |(i, j)| ((i * 13 + j * 7) % 17) as f64);
        let y: Vec<f64> = (0..40).map(|i| (i % 5) as f64).collect();
        let rows: Vec<usize> = (0..40).collect();
        let t = train_tree(x.view(), &y, &rows, &params(2), &mut stream_rng(4, 0));
        for n in t.nodes.iter().filter(|n| !n.is_leaf()) {
            assert_eq!(n.cover, t.nodes[n.left].cover + t.nodes[n.right].cover);
        }
    }
}
