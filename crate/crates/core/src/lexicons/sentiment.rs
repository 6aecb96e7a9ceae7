//! Rule-based valence scoring in the style of VADER.
//!
//! Only the core rule set is implemented: lexicon lookup, all-caps emphasis,
//! boosters with distance decay, negation in a three-token lookback,
//! contrastive "but", and exclamation emphasis. Idiom, question-mark and
//! "least" rules are not.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::textprep::TokenStream;
use crate::util::read_lines;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SentimentConstants {
    pub alpha: f64,
    pub negation_scale: f64,
    pub caps_boost: f64,
    pub exclamation_increment: f64,
    pub exclamation_max: usize,
    pub but_before: f64,
    pub but_after: f64,
    /// Booster weight multipliers at distance 1, 2 and 3.
    pub booster_decay: [f64; 3],
}

impl Default for SentimentConstants {
    fn default() -> Self {
        SentimentConstants {
            alpha: 15.0,
            negation_scale: -0.74,
            caps_boost: 0.733,
            exclamation_increment: 0.292,
            exclamation_max: 3,
            but_before: 0.5,
            but_after: 1.5,
            booster_decay: [1.0, 0.95, 0.90],
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SentimentScore {
    pub pos: f64,
    pub neu: f64,
    pub neg: f64,
    pub compound: f64,
}

impl SentimentScore {
    pub fn to_array(self) -> [f64; 4] {
        [self.pos, self.neu, self.neg, self.compound]
    }
}

#[derive(Clone, Debug, Default)]
pub struct SentimentLexicon {
    pub valence: HashMap<String, f64>,
    pub boosters: HashMap<String, f64>,
    pub negations: HashSet<String>,
    pub constants: SentimentConstants,
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

fn load_weights(path: &Path) -> Result<HashMap<String, f64>> {
    let mut out = HashMap::new();
    for (line, text) in read_lines(path)? {
        let mut parts = text.split('\t');
        let (Some(token), Some(value)) = (parts.next(), parts.next()) else {
            return Err(parse_err(path, line, "expected `token<TAB>value`"));
        };
        let v: f64 = value
            .trim()
            .parse()
            .map_err(|_| parse_err(path, line, format!("bad number `{value}`")))?;
        if !v.is_finite() {
            return Err(parse_err(path, line, "value is not finite"));
        }
        out.insert(token.to_string(), v);
    }
    Ok(out)
}

impl SentimentLexicon {
    pub fn new(
        valence: HashMap<String, f64>,
        boosters: HashMap<String, f64>,
        negations: HashSet<String>,
    ) -> Result<Self> {
        if let Some((t, v)) = valence.iter().find(|(_, v)| !(-4.0..=4.0).contains(*v)) {
            return Err(Error::InvalidInput(format!("valence of `{t}` is {v}, outside [-4, 4]")));
        }
        Ok(SentimentLexicon {
            valence,
            boosters,
            negations,
            constants: SentimentConstants::default(),
        })
    }

    pub fn load(valence: &Path, boosters: &Path, negations: &Path) -> Result<Self> {
        let negs = read_lines(negations)?
            .into_iter()
            .map(|(_, l)| l.trim().to_lowercase())
            .collect();
        SentimentLexicon::new(load_weights(valence)?, load_weights(boosters)?, negs)
    }

    fn is_negation(&self, lower: &str) -> bool {
        self.negations.contains(lower) || lower.contains("n't")
    }
}

/// Python-style `str.isupper`: at least one cased character and no lowercase.
fn is_upper(s: &str) -> bool {
    s.chars().any(|c| c.is_uppercase()) && !s.chars().any(|c| c.is_lowercase())
}

/// Strip surrounding ASCII punctuation unless that leaves two characters or
/// fewer, so emoticons such as ":)" survive.
fn strip_punct_if_word(token: &str) -> &str {
    let stripped = token.trim_matches(|c: char| c.is_ascii_punctuation());
    if stripped.chars().count() <= 2 {
        token
    } else {
        stripped
    }
}

/// The scored units: punctuation-stripped tokens longer than one character.
pub fn sentiment_units(stream: &TokenStream) -> Vec<&str> {
    stream
        .tokens
        .iter()
        .map(|t| strip_punct_if_word(t))
        .filter(|t| t.chars().count() > 1)
        .collect()
}

/// Per-unit adjusted valences, "but" rule included.
fn unit_valences(words: &[&str], lex: &SentimentLexicon) -> Vec<f64> {
    let c = &lex.constants;
    let lower: Vec<String> = words.iter().map(|w| w.to_lowercase()).collect();
    let upper_count = words.iter().filter(|w| is_upper(w)).count();
    let cap_diff = upper_count > 0 && upper_count < words.len();

    let mut out = Vec::with_capacity(words.len());
    for (i, word) in words.iter().enumerate() {
        if lex.boosters.contains_key(&lower[i]) {
            out.push(0.0);
            continue;
        }
        let Some(&base) = lex.valence.get(&lower[i]) else {
            out.push(0.0);
            continue;
        };
        let mut v = base;
        if cap_diff && is_upper(word) {
            v += c.caps_boost * v.signum();
        }
        for dist in 1..=3usize {
            if i < dist {
                break;
            }
            let j = i - dist;
            if lex.valence.contains_key(&lower[j]) {
                continue;
            }
            if let Some(&b) = lex.boosters.get(&lower[j]) {
                let mut s = if v < 0.0 { -b } else { b };
                if cap_diff && is_upper(words[j]) {
                    s += if v > 0.0 { c.caps_boost } else { -c.caps_boost };
                }
                v += s * c.booster_decay[dist - 1];
            }
            if lex.is_negation(&lower[j]) {
                v *= c.negation_scale;
            }
        }
        out.push(v);
    }

    if let Some(b) = lower.iter().position(|w| w == "but") {
        for (i, v) in out.iter_mut().enumerate() {
            if i < b {
                *v *= c.but_before;
            } else if i > b {
                *v *= c.but_after;
            }
        }
    }
    out
}

/// `x / sqrt(x^2 + alpha)`, clamped to [-1, 1].
pub fn normalize_compound(x: f64, alpha: f64) -> f64 {
    (x / (x * x + alpha).sqrt()).clamp(-1.0, 1.0)
}

pub fn score_sentiment(stream: &TokenStream, lex: &SentimentLexicon) -> SentimentScore {
    let c = &lex.constants;
    let words = sentiment_units(stream);
    if words.is_empty() {
        return SentimentScore::default();
    }
    let valences = unit_valences(&words, lex);

    let bangs: usize = stream.tokens.iter().map(|t| t.matches('!').count()).sum();
    let amp = bangs.min(c.exclamation_max) as f64 * c.exclamation_increment;

    let mut sum: f64 = valences.iter().sum();
    if sum > 0.0 {
        sum += amp;
    } else if sum < 0.0 {
        sum -= amp;
    }
    let compound = normalize_compound(sum, c.alpha);

    // each non-neutral unit also carries one neutral-sized unit of magnitude
    let mut pos = 0.0;
    let mut neg = 0.0;
    let mut neu = 0.0;
    for &v in &valences {
        if v > 0.0 {
            pos += v + 1.0;
        } else if v < 0.0 {
            neg += 1.0 - v;
        } else {
            neu += 1.0;
        }
    }
    if pos > neg {
        pos += amp;
    } else if pos < neg {
        neg += amp;
    }
    let total = pos + neg + neu;
    SentimentScore {
        pos: pos / total,
        neu: neu / total,
        neg: neg / total,
        compound,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lex() -> SentimentLexicon {
        let valence = [("good", 1.9), ("bad", -2.5), ("great", 3.1)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        let boosters = [("very", 0.293), ("barely", -0.293)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        let negations = ["not", "never"].into_iter().map(String::from).collect();
        SentimentLexicon::new(valence, boosters, negations).unwrap()
    }

    fn score(text: &str) -> SentimentScore {
        score_sentiment(&crate::textprep::tokenize_preserving(text), &lex())
    }

    #[test]
    fn empty_is_all_zero() {
        assert_eq!(score(""), SentimentScore::default());
    }

    #[test]
    fn single_word_compound() {
        let s = score("good");
        assert!((s.compound - 1.9 / (1.9f64 * 1.9 + 15.0).sqrt()).abs() < 1e-12);
        assert!((s.compound - 0.4404).abs() < 1e-4);
        assert_eq!(s.pos, 1.0);
    }

    #[test]
    fn negation_flips_sign() {
        let s = score("not good");
        let v: f64 = -0.74 * 1.9;
        assert!((s.compound - v / (v * v + 15.0).sqrt()).abs() < 1e-12);
        assert!(s.compound < 0.0);
    }

    #[test]
    fn no_match_is_neutral() {
        let s = score("the table");
        assert_eq!((s.pos, s.neu, s.neg, s.compound), (0.0, 1.0, 0.0, 0.0));
    }

    #[test]
    fn out_of_range_valence_rejected() {
        let v = [("x".to_string(), 4.5)].into_iter().collect();
        assert!(SentimentLexicon::new(v, HashMap::new(), HashSet::new()).is_err());
    }

    #[test]
    fn short_stripped_tokens_keep_punctuation() {
        assert_eq!(strip_punct_if_word(":)"), ":)");
        assert_eq!(strip_punct_if_word("good!!!"), "good");
        assert_eq!(strip_punct_if_word("ok!"), "ok!");
    }
}
