//! Character-trigram language identification with out-of-place rank distance.
//!
//! Words are lowercased, non-letters act as separators, and each word is
//! padded with `_` on both sides before trigrams are taken. A profile is the
//! list of the most frequent trigrams, most frequent first (ties broken
//! lexicographically). The distance between a document profile and a language
//! profile sums, over the document's trigrams, the absolute rank difference,
//! or the profile length when the trigram is absent from the language profile.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::util::read_lines;
use crate::{Error, Result};

/// Number of trigrams kept per profile.
pub const PROFILE_SIZE: usize = 300;

/// Code returned when the text is too short to classify.
pub const UNDETERMINED: &str = "und";

const MIN_CHARS: usize = 20;

#[derive(Clone, Debug, PartialEq)]
pub struct LanguageProfile {
    pub code: String,
    trigrams: Vec<String>,
    ranks: HashMap<String, usize>,
}

impl LanguageProfile {
    pub fn new(code: impl Into<String>, trigrams: Vec<String>) -> Result<Self> {
        let code = code.into();
        let mut ranks = HashMap::with_capacity(trigrams.len());
        for (i, t) in trigrams.iter().enumerate() {
            if ranks.insert(t.clone(), i).is_some() {
                return Err(Error::InvalidInput(format!("duplicate trigram `{t}` in profile `{code}`")));
            }
        }
        Ok(LanguageProfile { code, trigrams, ranks })
    }

    /// Build a profile from raw training text.
    pub fn from_text(code: impl Into<String>, text: &str, size: usize) -> Self {
        let trigrams = trigram_profile(text, size);
        LanguageProfile::new(code, trigrams).expect("ranked trigrams are unique")
    }

    /// Load a profile file (one trigram per line, most frequent first). The
    /// language code is the file stem.
    pub fn load(path: &Path) -> Result<Self> {
        let code = path
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| Error::InvalidInput(format!("bad profile file name {}", path.display())))?
            .to_string();
        let trigrams = read_lines(path)?.into_iter().map(|(_, l)| l).collect();
        LanguageProfile::new(code, trigrams)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        for t in &self.trigrams {
            writeln!(f, "{t}").map_err(|e| Error::io(path, e))?;
        }
        Ok(())
    }

    pub fn trigrams(&self) -> &[String] {
        &self.trigrams
    }

    pub fn len(&self) -> usize {
        self.trigrams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trigrams.is_empty()
    }

    /// Out-of-place distance from a ranked document trigram list.
    pub fn distance(&self, doc: &[String]) -> usize {
        let max = self.trigrams.len();
        doc.iter()
            .enumerate()
            .map(|(i, t)| match self.ranks.get(t) {
                Some(&r) => r.abs_diff(i),
                None => max,
            })
            .sum()
    }
}

/// Ranked trigram list of `text`, at most `size` entries.
pub fn trigram_profile(text: &str, size: usize) -> Vec<String> {
    let mut counts: HashMap<String, usize> = HashMap::new();
    let lower = text.to_lowercase();
    for word in lower.split(|c: char| !c.is_alphabetic()).filter(|w| !w.is_empty()) {
        let padded: Vec<char> = std::iter::once('_').chain(word.chars()).chain(std::iter::once('_')).collect();
        for w in padded.windows(3) {
            *counts.entry(w.iter().collect()).or_default() += 1;
        }
    }
    let mut ranked: Vec<(String, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(size);
    ranked.into_iter().map(|(t, _)| t).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Detection {
    pub code: String,
    /// `1 - d_best / d_second`, clamped to [0, 1].
    pub confidence: f64,
}

#[derive(Clone, Debug, Default)]
pub struct LanguageDetector {
    profiles: Vec<LanguageProfile>,
}

impl LanguageDetector {
    pub fn new(mut profiles: Vec<LanguageProfile>) -> Self {
        profiles.sort_by(|a, b| a.code.cmp(&b.code));
        LanguageDetector { profiles }
    }

    /// Load every `*.txt` profile in `dir`.
    pub fn load_dir(dir: &Path) -> Result<Self> {
        let mut profiles = Vec::new();
        let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
        for entry in entries {
            let path = entry.map_err(|e| Error::io(dir, e))?.path();
            if path.is_file() && path.extension().is_some_and(|e| e == "txt") {
                profiles.push(LanguageProfile::load(&path)?);
            }
        }
        if profiles.is_empty() {
            return Err(Error::InvalidInput(format!("no language profiles in {}", dir.display())));
        }
        Ok(LanguageDetector::new(profiles))
    }

    pub fn profiles(&self) -> &[LanguageProfile] {
        &self.profiles
    }

    pub fn detect(&self, text: &str) -> Detection {
        let undetermined = Detection {
            code: UNDETERMINED.into(),
            confidence: 0.0,
        };
        if text.trim().chars().count() < MIN_CHARS || self.profiles.is_empty() {
            return undetermined;
        }
        let doc = trigram_profile(text, PROFILE_SIZE);
        if doc.is_empty() {
            return undetermined;
        }
        let mut scored: Vec<(usize, &str)> = self
            .profiles
            .iter()
            .map(|p| (p.distance(&doc), p.code.as_str()))
            .collect();
        scored.sort();
        let (best, code) = scored[0];
        let confidence = match scored.get(1) {
            Some(&(second, _)) if second > 0 => (1.0 - best as f64 / second as f64).clamp(0.0, 1.0),
            Some(_) => 0.0,
            None => 1.0,
        };
        Detection {
            code: code.to_string(),
            confidence,
        }
    }
}
