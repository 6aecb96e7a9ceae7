//! Lexicon-based scoring of sentiment, emotions and moral valence.

mod emotion;
mod moral;
mod sentiment;

pub use emotion::{score_emotions, Emotion, EmotionAveraging, EmotionLexicon};
pub use moral::{score_moral, MoralFallback, MoralLexicon, MoralScore, NEUTRAL};
pub use sentiment::{
    normalize_compound, score_sentiment, sentiment_units, SentimentConstants, SentimentLexicon, SentimentScore,
};

use std::path::Path;

use crate::Result;

/// All three lexicons plus the scoring modes.
#[derive(Clone, Debug, Default)]
pub struct Lexicons {
    pub sentiment: SentimentLexicon,
    pub emotion: EmotionLexicon,
    pub moral: MoralLexicon,
    pub emotion_averaging: EmotionAveraging,
    pub moral_fallback: MoralFallback,
}

impl Lexicons {
    /// Load the standard file set from a directory: `vader_lexicon.tsv`,
    /// `boosters.tsv`, `negations.txt`, `emotion.tsv`, `moral.tsv`.
    pub fn load_dir(dir: &Path) -> Result<Self> {
        Ok(Lexicons {
            sentiment: SentimentLexicon::load(
                &dir.join("vader_lexicon.tsv"),
                &dir.join("boosters.tsv"),
                &dir.join("negations.txt"),
            )?,
            emotion: EmotionLexicon::load(&dir.join("emotion.tsv"))?,
            moral: MoralLexicon::load(&dir.join("moral.tsv"))?,
            emotion_averaging: EmotionAveraging::default(),
            moral_fallback: MoralFallback::default(),
        })
    }
}
