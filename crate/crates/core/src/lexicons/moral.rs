use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::textprep::LemmaStream;
use crate::util::read_lines;
use crate::{Error, Foundation, Result};

/// Neutral point of the 1-9 valence scale.
pub const NEUTRAL: f64 = 5.0;

/// How foundations without matches are filled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoralFallback {
    /// Each foundation is the mean over lemmas that cover it, or neutral.
    #[default]
    PerFoundation,
    /// Each matched lemma is treated as a full 5-vector with neutral values
    /// for the foundations it does not cover; the lyric is the mean over
    /// matched lemmas, or all-neutral when nothing matched.
    PerLyric,
}

#[derive(Clone, Debug, Default)]
pub struct MoralLexicon {
    pub valence: HashMap<String, [Option<f64>; 5]>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MoralScore {
    pub values: [f64; 5],
    /// Matched lemma occurrences per foundation.
    pub coverage: [usize; 5],
}

impl MoralLexicon {
    pub fn from_entries(entries: impl IntoIterator<Item = (String, Foundation, f64)>) -> Result<Self> {
        let mut valence: HashMap<String, [Option<f64>; 5]> = HashMap::new();
        for (lemma, f, v) in entries {
            if !(1.0..=9.0).contains(&v) {
                return Err(Error::InvalidInput(format!("{lemma}/{f} valence {v} outside [1, 9]")));
            }
            let slot = &mut valence.entry(lemma.clone()).or_insert([None; 5])[f.index()];
            if slot.is_some() {
                return Err(Error::DuplicateId {
                    kind: "moral lexicon entry",
                    id: format!("{lemma}/{f}"),
                });
            }
            *slot = Some(v);
        }
        Ok(MoralLexicon { valence })
    }

    /// Load a `lemma<TAB>foundation<TAB>valence` file.
    pub fn load(path: &Path) -> Result<Self> {
        let err = |line, message: String| Error::Parse {
            path: path.display().to_string(),
            line,
            message,
        };
        let mut entries = Vec::new();
        for (line, text) in read_lines(path)? {
            let parts: Vec<&str> = text.split('\t').collect();
            if parts.len() != 3 {
                return Err(err(line, "expected `lemma<TAB>foundation<TAB>valence`".into()));
            }
            let f: Foundation = parts[1]
                .trim()
                .parse()
                .map_err(|_| err(line, format!("unknown foundation `{}`", parts[1])))?;
            let v: f64 = parts[2]
                .trim()
                .parse()
                .map_err(|_| err(line, format!("bad valence `{}`", parts[2])))?;
            if !(1.0..=9.0).contains(&v) {
                return Err(err(line, format!("valence {v} outside [1, 9]")));
            }
            entries.push((parts[0].trim().to_lowercase(), f, v));
        }
        MoralLexicon::from_entries(entries)
    }

    pub fn get(&self, lemma: &str) -> Option<&[Option<f64>; 5]> {
        self.valence.get(lemma)
    }
}

pub fn score_moral(stream: &LemmaStream, lex: &MoralLexicon, fallback: MoralFallback) -> MoralScore {
    let mut sum = [0.0; 5];
    let mut coverage = [0usize; 5];
    let mut matched = 0usize;
    for lemma in &stream.lemmas {
        let Some(entry) = lex.get(lemma) else { continue };
        matched += 1;
        for (i, v) in entry.iter().enumerate() {
            if let Some(v) = v {
                sum[i] += v;
                coverage[i] += 1;
            } else if fallback == MoralFallback::PerLyric {
                sum[i] += NEUTRAL;
            }
        }
    }
    let values = std::array::from_fn(|i| match fallback {
        MoralFallback::PerFoundation if coverage[i] > 0 => sum[i] / coverage[i] as f64,
        MoralFallback::PerLyric if matched > 0 => sum[i] / matched as f64,
        _ => NEUTRAL,
    });
    MoralScore { values, coverage }
}
