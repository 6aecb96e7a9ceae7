//! Lyrics-to-morality toolkit.
//!
//! The crate turns song lyrics into a per-song lyrical profile (topics, moral
//! valence, sentiment, emotions), aggregates those profiles per listener, and
//! fits regressors that predict the listener's Moral Foundations scores.
//!
//! Modules mirror the pipeline stages:
//!
//! * [`corpus`]: JSONL ingestion, trigram language identification, filtering.
//! * [`textprep`]: the punctuation-preserving token stream and the lemma stream.
//! * [`lexicons`]: rule-based sentiment, word-emotion averaging, moral valence.
//! * [`topics`]: vocabulary, collapsed Gibbs LDA, C_v coherence, topic-count selection.
//! * [`features`]: the per-song feature vector, per-user aggregation, design matrices.
//! * [`models`]: CART forests, elastic net, cross-validation, correlation statistics.
//! * [`explain`]: exact tree SHAP, its enumeration oracle, permutation importance.
//! * [`synth`]: planted-signal cohort generator.

pub mod corpus;
pub mod explain;
pub mod features;
pub mod lexicons;
pub mod models;
pub mod synth;
pub mod textprep;
pub mod topics;

mod error;
mod foundations;
pub mod util;

pub use error::{Error, Result};
pub use foundations::{Foundation, Target};
