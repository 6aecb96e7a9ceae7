//! Feature ranking by mean |phi| and grouped contributions.

use serde::{Deserialize, Serialize};

use super::ShapExplanation;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedFeature {
    pub feature: usize,
    pub label: String,
    pub mean_abs_phi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupContribution {
    pub group: String,
    pub columns: Vec<usize>,
    /// Signed sum of phi over the group's columns, per instance.
    pub sum_phi: Vec<f64>,
    /// Sum of |phi| over the group's columns, per instance.
    pub sum_abs_phi: Vec<f64>,
    pub mean_sum_phi: f64,
    pub mean_sum_abs_phi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupedExplanation {
    pub instances: Vec<usize>,
    pub groups: Vec<GroupContribution>,
}

fn check_partition(groups: &[(String, Vec<usize>)], p: usize) -> Result<()> {
    let mut seen = vec![0usize; p];
    for (name, cols) in groups {
        for &c in cols {
            if c >= p {
                return Err(Error::NotAPartition(format!("group `{name}` names column {c} of {p}")));
            }
            seen[c] += 1;
        }
    }
    if let Some(c) = seen.iter().position(|&s| s != 1) {
        return Err(Error::NotAPartition(format!("column {c} appears in {} groups", seen[c])));
    }
    Ok(())
}

/// Rank features by mean |phi| over the cohort (ties keep column order) and
/// sum attributions over `groups`, which must partition the columns.
pub fn rank_and_group(
    explanations: &[ShapExplanation],
    labels: &[String],
    groups: &[(String, Vec<usize>)],
    top_n: usize,
) -> Result<(GroupedExplanation, Vec<RankedFeature>)> {
    let p = labels.len();
    if let Some(e) = explanations.iter().find(|e| e.phi.len() != p) {
        return Err(Error::InvalidInput(format!(
            "explanation for instance {} has {} values, expected {p}",
            e.instance,
            e.phi.len()
        )));
    }
    check_partition(groups, p)?;
    let n = explanations.len().max(1) as f64;
    let mut ranked: Vec<RankedFeature> = (0..p)
        .map(|j| RankedFeature {
            feature: j,
            label: labels[j].clone(),
            mean_abs_phi: explanations.iter().map(|e| e.phi[j].abs()).sum::<f64>() / n,
        })
        .collect();
    ranked.sort_by(|a, b| b.mean_abs_phi.total_cmp(&a.mean_abs_phi).then(a.feature.cmp(&b.feature)));
    ranked.truncate(top_n);

    let groups = groups
        .iter()
        .map(|(name, cols)| {
            let sum_phi: Vec<f64> = explanations.iter().map(|e| cols.iter().map(|&c| e.phi[c]).sum()).collect();
            let sum_abs_phi: Vec<f64> =
                explanations.iter().map(|e| cols.iter().map(|&c| e.phi[c].abs()).sum()).collect();
            GroupContribution {
                group: name.clone(),
                columns: cols.clone(),
                mean_sum_phi: sum_phi.iter().sum::<f64>() / n,
                mean_sum_abs_phi: sum_abs_phi.iter().sum::<f64>() / n,
                sum_phi,
                sum_abs_phi,
            }
        })
        .collect();
    Ok((
        GroupedExplanation {
            instances: explanations.iter().map(|e| e.instance).collect(),
            groups,
        },
        ranked,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex(phi: Vec<f64>) -> ShapExplanation {
        ShapExplanation {
            instance: 0,
            phi,
            base_value: 0.0,
            prediction: 0.0,
        }
    }

    fn labels(p: usize) -> Vec<String> {
        (0..p).map(|j| format!("f{j}")).collect()
    }

    #[test]
    fn overlapping_or_missing_groups_rejected() {
        let e = [ex(vec![1.0, 2.0, 3.0])];
        let bad = [("a".to_string(), vec![0, 1]), ("b".to_string(), vec![1, 2])];
        assert!(matches!(rank_and_group(&e, &labels(3), &bad, 3), Err(Error::NotAPartition(_))));
        let gap = [("a".to_string(), vec![0, 1])];
        assert!(matches!(rank_and_group(&e, &labels(3), &gap, 3), Err(Error::NotAPartition(_))));
    }

    #[test]
    fn ranking_and_group_sums() {
        let e = [ex(vec![0.1, -0.5, 0.3]), ex(vec![0.1, -0.5, 0.3])];
        let g = [("a".to_string(), vec![0, 2]), ("b".to_string(), vec![1])];
        let (grouped, ranked) = rank_and_group(&e, &labels(3), &g, 2).unwrap();
        assert_eq!(ranked.iter().map(|r| r.feature).collect::<Vec<_>>(), vec![1, 2]);
        assert!((grouped.groups[0].mean_sum_phi - 0.4).abs() < 1e-15);
        assert!((grouped.groups[1].mean_sum_abs_phi - 0.5).abs() < 1e-15);
    }
}
