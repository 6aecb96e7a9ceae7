//! Per-song lyrical feature vectors, per-user aggregation, normalisation and
//! the experiment design matrices.

mod experiments;
mod normalize;
mod user;

pub use experiments::{
    build_design_matrix, target_matrix, Design, ExperimentId, ExperimentSpec, FeatureGroup, GroupKind,
};
pub use normalize::{NormalizationParams, MIN_SD};
pub use user::{aggregate_user, Aggregation, UserFeatures};

use crate::corpus::Song;
use crate::lexicons::{score_emotions, score_moral, score_sentiment, Emotion, Lexicons};
use crate::textprep::{lemmatize, tokenize_preserving, LemmaStream, LemmaTable, Stopwords};
use crate::topics::{infer_topics, LdaModel};
use crate::util::derive_seed_str;
use crate::{Error, Foundation, Result};

pub const SENTIMENT_LABELS: [&str; 4] = ["pos", "neu", "neg", "compound"];

/// Topic block (K values), then 5 morals, 4 sentiment scores, 8 emotions.
#[derive(Clone, Debug, PartialEq)]
pub struct SongFeatures {
    pub topics: Vec<f64>,
    pub morals: [f64; 5],
    pub sentiment: [f64; 4],
    pub emotions: [f64; 8],
}

impl SongFeatures {
    pub fn dim(k: usize) -> usize {
        k + 17
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.topics.clone();
        v.extend(self.morals);
        v.extend(self.sentiment);
        v.extend(self.emotions);
        v
    }

    pub fn from_slice(v: &[f64], k: usize) -> Result<Self> {
        if v.len() != SongFeatures::dim(k) {
            return Err(Error::InvalidInput(format!(
                "song feature vector has {} values, expected {}",
                v.len(),
                SongFeatures::dim(k)
            )));
        }
        Ok(SongFeatures {
            topics: v[..k].to_vec(),
            morals: v[k..k + 5].try_into().unwrap(),
            sentiment: v[k + 5..k + 9].try_into().unwrap(),
            emotions: v[k + 9..k + 17].try_into().unwrap(),
        })
    }
}

/// Column labels of the lyrical block for `k` topics.
pub fn lyrical_labels(k: usize) -> Vec<String> {
    let mut out: Vec<String> = (1..=k).map(|t| format!("topic_{t}")).collect();
    out.extend(Foundation::ALL.iter().map(|f| f.name().to_string()));
    out.extend(SENTIMENT_LABELS.iter().map(|s| s.to_string()));
    out.extend(Emotion::ALL.iter().map(|e| e.name().to_string()));
    out
}

/// Everything needed to turn lyrics into features.
#[derive(Clone, Debug)]
pub struct TextPipeline {
    pub lemmas: LemmaTable,
    pub stopwords: Stopwords,
    pub lexicons: Lexicons,
    pub fold_in_iterations: usize,
}

impl TextPipeline {
    pub fn lemmatize(&self, text: &str) -> LemmaStream {
        lemmatize(text, &self.lemmas, &self.stopwords)
    }
}

/// Moral, sentiment and emotion scores of one lyric; the non-topic part of
/// the song vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LexicalScores {
    pub morals: [f64; 5],
    pub sentiment: [f64; 4],
    pub emotions: [f64; 8],
}

impl LexicalScores {
    /// The 17 values in lyrical-block order (morals, sentiment, emotions).
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.morals.to_vec();
        v.extend(self.sentiment);
        v.extend(self.emotions);
        v
    }
}

fn lexical_from(lyrics: &str, lemmas: &LemmaStream, pipe: &TextPipeline) -> LexicalScores {
    let lex = &pipe.lexicons;
    LexicalScores {
        morals: score_moral(lemmas, &lex.moral, lex.moral_fallback).values,
        sentiment: score_sentiment(&tokenize_preserving(lyrics), &lex.sentiment).to_array(),
        emotions: score_emotions(lemmas, &lex.emotion, lex.emotion_averaging),
    }
}

pub fn lexical_scores(lyrics: &str, pipe: &TextPipeline) -> LexicalScores {
    lexical_from(lyrics, &pipe.lemmatize(lyrics), pipe)
}

/// Features of one song. The fold-in seed is derived from `seed` and the
/// song id, so results do not depend on processing order.
pub fn assemble_song_features(song: &Song, pipe: &TextPipeline, lda: &LdaModel, seed: u64) -> SongFeatures {
    let lemmas = pipe.lemmatize(&song.lyrics);
    let lex = lexical_from(&song.lyrics, &lemmas, pipe);
    SongFeatures {
        topics: infer_topics(lda, &lemmas.lemmas, pipe.fold_in_iterations, derive_seed_str(seed, &song.song_id)),
        morals: lex.morals,
        sentiment: lex.sentiment,
        emotions: lex.emotions,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_matches_labels() {
        let labels = lyrical_labels(4);
        assert_eq!(labels.len(), 21);
        assert_eq!(labels[4], "care");
        assert_eq!(labels[9], "pos");
        assert_eq!(labels[20], "trust");
    }

    #[test]
    fn slice_roundtrip() {
        let v: Vec<f64> = (0..21).map(f64::from).collect();
        let f = SongFeatures::from_slice(&v, 4).unwrap();
        assert_eq!(f.morals[0], 4.0);
        assert_eq!(f.sentiment[0], 9.0);
        assert_eq!(f.to_vec(), v);
        assert!(SongFeatures::from_slice(&v, 3).is_err());
    }
}
