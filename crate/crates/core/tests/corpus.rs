mod common;

use std::fs;

use moralens_core::corpus::{filter_corpus, FilterParams, LanguageProfile, PROFILE_SIZE, UNDETERMINED};
use moralens_core::synth::{synthesize, SynthParams};
use proptest::prelude::*;

#[test]
fn held_out_lines_are_identified() {
    let det = common::detector();
    let dir = common::data_dir().join("langid/heldout");
    let mut total = 0;
    for code in ["de", "en", "es", "fr", "it"] {
        let text = fs::read_to_string(dir.join(format!("{code}.txt"))).unwrap();
        for line in text.lines().filter(|l| l.chars().count() >= 80) {
            assert_eq!(det.detect(line).code, code, "{line}");
            total += 1;
        }
    }
    assert!(total >= 5);
}

#[test]
fn short_text_is_undetermined() {
    assert_eq!(common::detector().detect("ciao amore").code, UNDETERMINED);
}

#[test]
fn shipped_profiles_match_their_training_text() {
    let dir = common::data_dir().join("langid");
    for code in ["de", "en", "es", "fr", "it"] {
        let text = fs::read_to_string(dir.join(format!("train/{code}.txt"))).unwrap();
        let rebuilt = LanguageProfile::from_text(code, &text, PROFILE_SIZE);
        let shipped = LanguageProfile::load(&dir.join(format!("{code}.txt"))).unwrap();
        assert_eq!(rebuilt.trigrams(), shipped.trigrams(), "{code}");
    }
}

fn small_cohort(seed: u64, top_n: usize, min_likes: usize) -> (moralens_core::corpus::Corpus, FilterParams) {
    let pipe = common::pipeline();
    let params = SynthParams {
        users: 60,
        artists: 20,
        songs_per_artist: 4,
        min_likes: 3,
        max_likes: 12,
        foreign_share: 0.3,
        words_per_song: 40,
        seed,
        ..Default::default()
    };
    let mut corpus = synthesize(&params, &pipe).unwrap().corpus;
    corpus.annotate_languages(&common::detector());
    (
        corpus,
        FilterParams {
            top_n,
            min_likes,
            language: "en".into(),
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn filtering_is_idempotent(seed in 0..1000u64, top_n in 1..6usize, min_likes in 1..12usize) {
        let (corpus, params) = small_cohort(seed, top_n, min_likes);
        let (once, _) = filter_corpus(&corpus, &params);
        let (twice, report) = filter_corpus(&once, &params);
        prop_assert_eq!(&once, &twice);
        prop_assert_eq!(report.songs_wrong_language + report.songs_beyond_top_n, 0);
        for artist in once.catalog.values() {
            prop_assert!(artist.songs.len() <= top_n);
            prop_assert!(artist.songs.iter().all(|s| s.language.as_deref() == Some("en")));
        }
        for u in &once.users {
            prop_assert!(u.liked_artist_ids.len() >= min_likes);
            prop_assert!(u.liked_artist_ids.iter().all(|a| once.catalog.contains_key(a)));
        }
    }
}
