use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use crate::util::read_lines;
use crate::{Error, Result};

/// Strip `suffix` and append `replacement`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuffixRule {
    pub suffix: String,
    pub replacement: String,
}

impl SuffixRule {
    pub fn new(suffix: &str, replacement: &str) -> Self {
        SuffixRule {
            suffix: suffix.into(),
            replacement: replacement.into(),
        }
    }

    fn apply(&self, word: &str) -> Option<String> {
        let stem = word.strip_suffix(self.suffix.as_str())?;
        if stem.is_empty() {
            return None;
        }
        Some(format!("{stem}{}", self.replacement))
    }

    /// Inflectional rules tried in order for words missing from the table.
    pub fn defaults() -> Vec<SuffixRule> {
        [
            ("ies", "y"),
            ("ves", "f"),
            ("ves", "fe"),
            ("es", ""),
            ("s", ""),
            ("ied", "y"),
            ("ed", ""),
            ("ed", "e"),
            ("d", ""),
            ("ing", ""),
            ("ing", "e"),
        ]
        .into_iter()
        .map(|(s, r)| SuffixRule::new(s, r))
        .collect()
    }
}

/// Surface form to lemma lookup with a suffix-rule fallback.
///
/// Suffix rules only fire when the result is a lemma already present in the
/// table, and never on a word that is itself a known lemma, so lemmas are
/// fixed points of [`LemmaTable::lemma`].
#[derive(Clone, Debug, Default)]
pub struct LemmaTable {
    map: HashMap<String, String>,
    lemmas: HashSet<String>,
    rules: Vec<SuffixRule>,
}

impl LemmaTable {
    /// Build from (surface, lemma) pairs with the default suffix rules.
    ///
    /// A surface listed with several lemmas keeps the lemma that occurs most
    /// often across the whole table (first listed on ties). Chains such as
    /// `a -> b -> c` are resolved to `a -> c`; cycles are an error.
    pub fn from_pairs<S, L>(pairs: impl IntoIterator<Item = (S, L)>) -> Result<Self>
    where
        S: AsRef<str>,
        L: AsRef<str>,
    {
        let mut candidates: BTreeMap<String, Vec<String>> = BTreeMap::new();
        let mut freq: HashMap<String, usize> = HashMap::new();
        for (s, l) in pairs {
            let s = s.as_ref().trim().to_lowercase();
            let l = l.as_ref().trim().to_lowercase();
            if s.is_empty() || l.is_empty() {
                return Err(Error::InvalidInput("empty lemma table entry".into()));
            }
            *freq.entry(l.clone()).or_default() += 1;
            let c = candidates.entry(s).or_default();
            if !c.contains(&l) {
                c.push(l);
            }
        }
        let mut direct: HashMap<String, String> = HashMap::with_capacity(candidates.len());
        for (s, ls) in candidates {
            let mut best = &ls[0];
            for l in &ls[1..] {
                if freq[l] > freq[best] {
                    best = l;
                }
            }
            if *best != s {
                direct.insert(s, best.clone());
            }
        }

        let mut map = HashMap::with_capacity(direct.len());
        for start in direct.keys() {
            let mut seen = vec![start.as_str()];
            let mut cur = &direct[start];
            while let Some(next) = direct.get(cur) {
                if seen.contains(&cur.as_str()) {
                    return Err(Error::InvalidInput(format!("cyclic lemma chain through `{start}`")));
                }
                seen.push(cur);
                cur = next;
            }
            if seen.contains(&cur.as_str()) {
                return Err(Error::InvalidInput(format!("cyclic lemma chain through `{start}`")));
            }
            map.insert(start.clone(), cur.clone());
        }
        let lemmas = map.values().cloned().collect();
        Ok(LemmaTable {
            map,
            lemmas,
            rules: SuffixRule::defaults(),
        })
    }

    /// Load a `surface<TAB>lemma` file.
    pub fn load(path: &Path) -> Result<Self> {
        let mut pairs = Vec::new();
        for (line, text) in read_lines(path)? {
            let mut parts = text.split('\t');
            match (parts.next(), parts.next(), parts.next()) {
                (Some(s), Some(l), None) if !s.trim().is_empty() && !l.trim().is_empty() => {
                    pairs.push((s.to_string(), l.to_string()))
                }
                _ => {
                    return Err(Error::Parse {
                        path: path.display().to_string(),
                        line,
                        message: "expected `surface<TAB>lemma`".into(),
                    })
                }
            }
        }
        LemmaTable::from_pairs(pairs)
    }

    pub fn with_rules(mut self, rules: Vec<SuffixRule>) -> Self {
        self.rules = rules;
        self
    }

    pub fn rules(&self) -> &[SuffixRule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn is_lemma(&self, word: &str) -> bool {
        self.lemmas.contains(word)
    }

    /// Lemma for a lowercase word; unknown words map to themselves.
    pub fn lemma<'a>(&'a self, word: &'a str) -> &'a str {
        if let Some(l) = self.map.get(word) {
            return l;
        }
        if self.lemmas.contains(word) {
            return word;
        }
        for rule in &self.rules {
            if let Some(cand) = rule.apply(word) {
                if let Some(l) = self.lemmas.get(&cand) {
                    return l;
                }
            }
        }
        word
    }
}
