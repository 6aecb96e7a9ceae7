//! One function per subcommand. Every stage reads its inputs through
//! [`Ctx::require`], writes its artifacts under the output directory and
//! records them in the manifest.

mod corpus;
mod model;
mod table;
mod topics;

pub use corpus::{filter, ingest, synth};
pub use model::{correlate, evaluate, explain, train};
pub use topics::{aggregate, extract, select_k, train_lda};

use std::path::Path;

use moralens_core::features::TextPipeline;
use moralens_core::lexicons::Lexicons;
use moralens_core::textprep::{LemmaTable, Stopwords};

use crate::error::Result;
use crate::manifest::Ctx;

pub const INGESTED_SONGS: &str = "corpus/songs.jsonl";
pub const INGESTED_ARTISTS: &str = "corpus/artists.jsonl";
pub const INGESTED_USERS: &str = "corpus/users.jsonl";
pub const INGEST_REPORT: &str = "ingest_report.json";
pub const FILTERED_SONGS: &str = "filtered/songs.jsonl";
pub const FILTERED_ARTISTS: &str = "filtered/artists.jsonl";
pub const FILTERED_USERS: &str = "filtered/users.jsonl";
pub const FILTER_REPORT: &str = "filter_report.json";
pub const LEMMAS: &str = "lemmas.jsonl";
pub const SONG_LEXICAL: &str = "song_lexical.csv";
pub const SELECT_K_RUNS: &str = "select_k_runs.csv";
pub const SELECT_K: &str = "select_k.csv";
pub const LDA_MODEL: &str = "lda.model";
pub const TOPICS: &str = "topics.csv";
pub const TOPIC_SUMMARY: &str = "topic_summary.csv";
pub const SONG_FEATURES: &str = "song_features.csv";
pub const USER_FEATURES: &str = "user_features.csv";
pub const CV_TABLE: &str = "cv_table.csv";
pub const CV_LONG: &str = "cv_long.csv";
pub const CV_FOLDS: &str = "cv_folds.csv";
pub const CV_CONTROL: &str = "cv_control.csv";
pub const BASES: &str = "bases.csv";
pub const MODELS: &str = "models";
pub const SHAP_DIR: &str = "shap";
pub const SHAP_SUMMARY: &str = "shap_summary.csv";
pub const SHAP_GROUPS: &str = "shap_groups.csv";
pub const IMPORTANCE: &str = "importance.csv";
pub const CORRELATIONS: &str = "correlations.csv";
pub const SYNTH_TRUTH: &str = "synth_truth.csv";

/// Child-seed slots of the master seed, one per consumer.
pub(crate) mod stream {
    pub const SELECT_K: u64 = 1;
    pub const LDA: u64 = 2;
    pub const FOLD_IN: u64 = 3;
    pub const CV: u64 = 4;
    pub const CONTROL: u64 = 5;
    pub const EXPLAIN: u64 = 6;
    pub const CORRELATE: u64 = 7;
    pub const TRAIN: u64 = 8;
    pub const SYNTH: u64 = 9;
}

pub(crate) fn load_pipeline(ctx: &Ctx) -> Result<TextPipeline> {
    let p = &ctx.cfg.paths;
    let mut lexicons = Lexicons::load_dir(&ctx.external(&p.lexicons)?)?;
    lexicons.emotion_averaging = ctx.cfg.features.emotion_averaging;
    lexicons.moral_fallback = ctx.cfg.features.moral_fallback;
    Ok(TextPipeline {
        lemmas: LemmaTable::load(&ctx.external(&p.lemmas)?)?,
        stopwords: Stopwords::load(&ctx.external(&p.stopwords)?)?,
        lexicons,
        fold_in_iterations: ctx.cfg.topics.fold_in_iterations,
    })
}

pub(crate) fn pipeline_inputs(ctx: &Ctx) -> Vec<std::path::PathBuf> {
    let p = &ctx.cfg.paths;
    vec![p.lexicons.clone(), p.lemmas.clone(), p.stopwords.clone()]
}

pub(crate) fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("report serialises");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| crate::error::CliError::io(path, e))
}
