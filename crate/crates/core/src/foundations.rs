use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::Error;

/// The five Moral Foundations, in questionnaire order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Foundation {
    Care,
    Fairness,
    Loyalty,
    Authority,
    Purity,
}

impl Foundation {
    pub const ALL: [Foundation; 5] = [
        Foundation::Care,
        Foundation::Fairness,
        Foundation::Loyalty,
        Foundation::Authority,
        Foundation::Purity,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Foundation::Care => "care",
            Foundation::Fairness => "fairness",
            Foundation::Loyalty => "loyalty",
            Foundation::Authority => "authority",
            Foundation::Purity => "purity",
        }
    }
}

impl fmt::Display for Foundation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Foundation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        Foundation::ALL
            .into_iter()
            .find(|f| f.name() == lower)
            .ok_or_else(|| Error::InvalidInput(format!("unknown moral foundation `{s}`")))
    }
}

/// Regression targets: the five foundations plus the two superior foundations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Care,
    Fairness,
    Loyalty,
    Authority,
    Purity,
    Individualising,
    Binding,
}

impl Target {
    pub const ALL: [Target; 7] = [
        Target::Care,
        Target::Fairness,
        Target::Loyalty,
        Target::Authority,
        Target::Purity,
        Target::Individualising,
        Target::Binding,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// One-letter row code used in result tables.
    pub fn code(self) -> &'static str {
        match self {
            Target::Care => "C",
            Target::Fairness => "F",
            Target::Loyalty => "L",
            Target::Authority => "A",
            Target::Purity => "P",
            Target::Individualising => "I",
            Target::Binding => "B",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Target::Care => "care",
            Target::Fairness => "fairness",
            Target::Loyalty => "loyalty",
            Target::Authority => "authority",
            Target::Purity => "purity",
            Target::Individualising => "individualising",
            Target::Binding => "binding",
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        Target::ALL
            .into_iter()
            .find(|x| x.name().eq_ignore_ascii_case(t) || x.code().eq_ignore_ascii_case(t))
            .ok_or_else(|| Error::InvalidInput(format!("unknown target `{s}`")))
    }
}
