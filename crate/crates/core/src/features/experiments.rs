use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::user::UserFeatures;
use super::{lyrical_labels, SongFeatures};
use crate::corpus::{AgeBin, Gender};
use crate::{Error, Result, Target};

/// Feature blocks that experiments switch on and off, in column order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureGroup {
    Topics,
    Morals,
    Sentiment,
    Emotions,
    Age,
    Gender,
    ArtistLikes,
    ArtistPopularity,
}

/// Coarser blocks used when summing attributions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupKind {
    Topics,
    Morals,
    Sentiment,
    Emotions,
    Demographics,
    ArtistInfo,
}

impl GroupKind {
    pub fn name(self) -> &'static str {
        match self {
            GroupKind::Topics => "topics",
            GroupKind::Morals => "morals",
            GroupKind::Sentiment => "sentiment",
            GroupKind::Emotions => "emotions",
            GroupKind::Demographics => "demographics",
            GroupKind::ArtistInfo => "artist_info",
        }
    }
}

impl FeatureGroup {
    pub const ALL: [FeatureGroup; 8] = [
        FeatureGroup::Topics,
        FeatureGroup::Morals,
        FeatureGroup::Sentiment,
        FeatureGroup::Emotions,
        FeatureGroup::Age,
        FeatureGroup::Gender,
        FeatureGroup::ArtistLikes,
        FeatureGroup::ArtistPopularity,
    ];

    pub fn width(self, k: usize) -> usize {
        match self {
            FeatureGroup::Topics => k,
            FeatureGroup::Morals => 5,
            FeatureGroup::Sentiment => 4,
            FeatureGroup::Emotions => 8,
            FeatureGroup::Age | FeatureGroup::Gender => 3,
            FeatureGroup::ArtistLikes | FeatureGroup::ArtistPopularity => 1,
        }
    }

    pub fn kind(self) -> GroupKind {
        match self {
            FeatureGroup::Topics => GroupKind::Topics,
            FeatureGroup::Morals => GroupKind::Morals,
            FeatureGroup::Sentiment => GroupKind::Sentiment,
            FeatureGroup::Emotions => GroupKind::Emotions,
            FeatureGroup::Age | FeatureGroup::Gender => GroupKind::Demographics,
            FeatureGroup::ArtistLikes | FeatureGroup::ArtistPopularity => GroupKind::ArtistInfo,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ExperimentId {
    Ex1,
    Ex2,
    Ex3,
    Ex4,
    Ex5,
    Ex6,
    Ex7,
    Ex8,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 8] = [
        ExperimentId::Ex1,
        ExperimentId::Ex2,
        ExperimentId::Ex3,
        ExperimentId::Ex4,
        ExperimentId::Ex5,
        ExperimentId::Ex6,
        ExperimentId::Ex7,
        ExperimentId::Ex8,
    ];

    /// Candidates for the "best of" base.
    pub const BASES: [ExperimentId; 3] = [ExperimentId::Ex1, ExperimentId::Ex2, ExperimentId::Ex3];

    pub fn name(self) -> &'static str {
        ["EX1", "EX2", "EX3", "EX4", "EX5", "EX6", "EX7", "EX8"][self as usize]
    }

    /// EX4 to EX8 build on the best of EX1 to EX3.
    pub fn needs_base(self) -> bool {
        self >= ExperimentId::Ex4
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentId::ALL
            .into_iter()
            .find(|e| e.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidInput(format!("unknown experiment `{s}`")))
    }
}

/// An experiment with its base resolved (or not yet).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub id: ExperimentId,
    pub base: Option<ExperimentId>,
}

impl ExperimentSpec {
    pub fn new(id: ExperimentId) -> Self {
        ExperimentSpec { id, base: None }
    }

    pub fn with_base(id: ExperimentId, base: ExperimentId) -> Self {
        ExperimentSpec { id, base: Some(base) }
    }

    /// Feature groups in column order.
    pub fn groups(&self) -> Result<Vec<FeatureGroup>> {
        use FeatureGroup as G;
        let base = || -> Result<Vec<FeatureGroup>> {
            match self.base {
                Some(b) if !b.needs_base() => ExperimentSpec::new(b).groups(),
                _ => Err(Error::UnresolvedBase(self.id.name().into())),
            }
        };
        let mut g = match self.id {
            ExperimentId::Ex1 => vec![G::Sentiment],
            ExperimentId::Ex2 => vec![G::Emotions],
            ExperimentId::Ex3 => vec![G::Sentiment, G::Emotions],
            ExperimentId::Ex4 => [base()?, vec![G::Morals]].concat(),
            ExperimentId::Ex5 => [base()?, vec![G::Topics]].concat(),
            ExperimentId::Ex6 => [base()?, vec![G::Morals, G::Topics]].concat(),
            ExperimentId::Ex7 => [base()?, vec![G::Morals, G::Topics, G::Age, G::Gender]].concat(),
            ExperimentId::Ex8 => [
                base()?,
                vec![G::Morals, G::Topics, G::Age, G::Gender, G::ArtistLikes, G::ArtistPopularity],
            ]
            .concat(),
        };
        g.sort();
        g.dedup();
        Ok(g)
    }

    pub fn width(&self, k: usize) -> Result<usize> {
        Ok(self.groups()?.iter().map(|g| g.width(k)).sum())
    }
}

/// A design matrix with its column labels and the block of every column.
#[derive(Clone, Debug, PartialEq)]
pub struct Design {
    pub x: Array2<f64>,
    pub labels: Vec<String>,
    pub groups: Vec<FeatureGroup>,
}

fn group_columns(g: FeatureGroup, k: usize) -> (std::ops::Range<usize>, Vec<String>) {
    let lyr = lyrical_labels(k);
    match g {
        FeatureGroup::Topics => (0..k, lyr[..k].to_vec()),
        FeatureGroup::Morals => (k..k + 5, lyr[k..k + 5].to_vec()),
        FeatureGroup::Sentiment => (k + 5..k + 9, lyr[k + 5..k + 9].to_vec()),
        FeatureGroup::Emotions => (k + 9..k + 17, lyr[k + 9..k + 17].to_vec()),
        FeatureGroup::Age => (0..0, AgeBin::ALL.iter().map(|a| format!("age_{}", a.label())).collect()),
        FeatureGroup::Gender => (0..0, Gender::ALL.iter().map(|a| format!("gender_{}", a.label())).collect()),
        FeatureGroup::ArtistLikes => (0..0, vec!["artist_likes".into()]),
        FeatureGroup::ArtistPopularity => (0..0, vec!["artist_popularity".into()]),
    }
}

/// Select the columns of `groups` for every user. Artist popularity enters
/// as `ln(1 + mean popularity)`.
pub fn build_design_matrix(groups: &[FeatureGroup], users: &[UserFeatures], k: usize) -> Result<Design> {
    let mut groups = groups.to_vec();
    groups.sort();
    groups.dedup();
    if let Some(u) = users.iter().find(|u| u.lyrical.len() != SongFeatures::dim(k)) {
        return Err(Error::InvalidInput(format!(
            "user `{}` has {} lyrical features, expected {}",
            u.user_id,
            u.lyrical.len(),
            SongFeatures::dim(k)
        )));
    }
    let width: usize = groups.iter().map(|g| g.width(k)).sum();
    let mut x = Array2::zeros((users.len(), width));
    let mut labels = Vec::with_capacity(width);
    let mut col_groups = Vec::with_capacity(width);
    let mut col = 0;
    for &g in &groups {
        let (range, names) = group_columns(g, k);
        for (i, u) in users.iter().enumerate() {
            let vals: Vec<f64> = match g {
                FeatureGroup::Age => AgeBin::ALL.iter().map(|&a| f64::from(u8::from(u.age_bin == a))).collect(),
                FeatureGroup::Gender => Gender::ALL.iter().map(|&a| f64::from(u8::from(u.gender == a))).collect(),
                FeatureGroup::ArtistLikes => vec![u.artist_like_count as f64],
                FeatureGroup::ArtistPopularity => vec![u.mean_artist_popularity.ln_1p()],
                _ => u.lyrical[range.clone()].to_vec(),
            };
            for (j, v) in vals.into_iter().enumerate() {
                x[[i, col + j]] = v;
            }
        }
        col += names.len();
        col_groups.extend(std::iter::repeat_n(g, names.len()));
        labels.extend(names);
    }
    Ok(Design {
        x,
        labels,
        groups: col_groups,
    })
}

/// Users × 7 targets in [`Target::ALL`] order.
pub fn target_matrix(users: &[UserFeatures]) -> Array2<f64> {
    let mut y = Array2::zeros((users.len(), Target::ALL.len()));
    for (i, u) in users.iter().enumerate() {
        for (j, v) in u.targets.iter().enumerate() {
            y[[i, j]] = *v;
        }
    }
    y
}
