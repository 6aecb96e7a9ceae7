#![allow(dead_code)]

use std::path::PathBuf;

use moralens_core::corpus::LanguageDetector;
use moralens_core::features::TextPipeline;
use moralens_core::lexicons::Lexicons;
use moralens_core::textprep::{LemmaTable, Stopwords};

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

pub fn pipeline() -> TextPipeline {
    let d = data_dir();
    TextPipeline {
        lemmas: LemmaTable::load(&d.join("lemmas.tsv")).unwrap(),
        stopwords: Stopwords::load(&d.join("stopwords.txt")).unwrap(),
        lexicons: Lexicons::load_dir(&d.join("lexicons")).unwrap(),
        fold_in_iterations: 50,
    }
}

pub fn detector() -> LanguageDetector {
    LanguageDetector::load_dir(&data_dir().join("langid")).unwrap()
}
