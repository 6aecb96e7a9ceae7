use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::textprep::LemmaStream;
use crate::util::read_lines;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emotion {
    Anger,
    Disgust,
    Fear,
    Sadness,
    Anticipation,
    Surprise,
    Joy,
    Trust,
}

impl Emotion {
    pub const ALL: [Emotion; 8] = [
        Emotion::Anger,
        Emotion::Disgust,
        Emotion::Fear,
        Emotion::Sadness,
        Emotion::Anticipation,
        Emotion::Surprise,
        Emotion::Joy,
        Emotion::Trust,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Emotion::Anger => "anger",
            Emotion::Disgust => "disgust",
            Emotion::Fear => "fear",
            Emotion::Sadness => "sadness",
            Emotion::Anticipation => "anticipation",
            Emotion::Surprise => "surprise",
            Emotion::Joy => "joy",
            Emotion::Trust => "trust",
        }
    }

    pub fn parse(s: &str) -> Option<Emotion> {
        Emotion::ALL.into_iter().find(|e| e.name() == s)
    }
}

impl fmt::Display for Emotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which lemmas count in the denominator of the emotion average.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmotionAveraging {
    #[default]
    AllLemmas,
    MatchedOnly,
}

#[derive(Clone, Debug, Default)]
pub struct EmotionLexicon {
    pub assoc: HashMap<String, [f64; 8]>,
}

impl EmotionLexicon {
    /// Load a `word<TAB>emotion<TAB>score` file. Rows for the polarity
    /// columns `positive` / `negative` are skipped.
    pub fn load(path: &Path) -> Result<Self> {
        let err = |line, message: String| Error::Parse {
            path: path.display().to_string(),
            line,
            message,
        };
        let mut assoc: HashMap<String, [f64; 8]> = HashMap::new();
        for (line, text) in read_lines(path)? {
            let parts: Vec<&str> = text.split('\t').collect();
            if parts.len() != 3 {
                return Err(err(line, "expected `word<TAB>emotion<TAB>score`".into()));
            }
            let label = parts[1].trim();
            if label == "positive" || label == "negative" {
                continue;
            }
            let emotion = Emotion::parse(label).ok_or_else(|| err(line, format!("unknown emotion `{label}`")))?;
            let v: f64 = parts[2]
                .trim()
                .parse()
                .map_err(|_| err(line, format!("bad score `{}`", parts[2])))?;
            if !(0.0..=1.0).contains(&v) {
                return Err(err(line, format!("score {v} outside [0, 1]")));
            }
            assoc.entry(parts[0].trim().to_lowercase()).or_insert([0.0; 8])[emotion.index()] = v;
        }
        Ok(EmotionLexicon { assoc })
    }

    pub fn get(&self, word: &str) -> Option<&[f64; 8]> {
        self.assoc.get(word)
    }
}

pub fn score_emotions(stream: &LemmaStream, lex: &EmotionLexicon, mode: EmotionAveraging) -> [f64; 8] {
    let mut sum = [0.0; 8];
    let mut matched = 0usize;
    for lemma in &stream.lemmas {
        if let Some(v) = lex.get(lemma) {
            matched += 1;
            for (s, x) in sum.iter_mut().zip(v) {
                *s += x;
            }
        }
    }
    let denom = match mode {
        EmotionAveraging::AllLemmas => stream.lemmas.len(),
        EmotionAveraging::MatchedOnly => matched,
    };
    if denom == 0 {
        return [0.0; 8];
    }
    sum.map(|s| s / denom as f64)
}
