//! Topic modelling: vocabulary, LDA by collapsed Gibbs sampling, C_v
//! coherence and topic-count selection.

mod coherence;
mod lda;
mod select;
mod vocab;

pub use coherence::{
    coherence_cv, coherence_for_topics, count_windows, npmi, CoherenceReport, WindowCounts, DEFAULT_TOP_N,
    DEFAULT_WINDOW, EPSILON,
};
pub use lda::{infer_topics, train_lda, GibbsSampler, LdaModel, LdaParams};
pub use select::{argmax_with_ties, select_k, Selection, SelectionRun, TIE_TOLERANCE};
pub use vocab::{build_vocab, DocTermMatrix, Vocabulary};
