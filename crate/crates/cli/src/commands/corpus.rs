use std::collections::BTreeMap;
use std::fs;
use std::time::Instant;

use moralens_core::corpus::{filter_corpus, load_corpus, write_corpus, LanguageDetector};
use moralens_core::synth::{synthesize, SynthParams};
use moralens_core::util::derive_seed;
use serde::Serialize;

use super::table::{num, strings, write_csv};
use super::*;
use crate::error::CliError;

#[derive(Serialize)]
struct IngestReport {
    songs: usize,
    artists: usize,
    users: usize,
    languages: BTreeMap<String, usize>,
}

/// Parse the raw corpus and tag every song with its detected language.
pub fn ingest(ctx: &mut Ctx) -> Result<()> {
    let started = Instant::now();
    let p = ctx.cfg.paths.clone();
    let (songs, artists, users) = (ctx.external(&p.songs)?, ctx.external(&p.artists)?, ctx.external(&p.users)?);
    let profiles = ctx.external(&p.language_profiles)?;
    let (mut corpus, loaded) = load_corpus(&songs, &artists, &users)?;
    corpus.annotate_languages(&LanguageDetector::load_dir(&profiles)?);
    let mut languages = BTreeMap::new();
    for s in corpus.songs() {
        *languages.entry(s.language.clone().unwrap_or_default()).or_insert(0) += 1;
    }
    ctx.ensure_dir("corpus")?;
    let outs = [ctx.path(INGESTED_SONGS), ctx.path(INGESTED_ARTISTS), ctx.path(INGESTED_USERS)];
    write_corpus(&corpus, &outs[0], &outs[1], &outs[2])?;
    let report = IngestReport {
        songs: loaded.songs,
        artists: loaded.artists,
        users: loaded.users,
        languages,
    };
    write_json(&ctx.path(INGEST_REPORT), &report)?;
    let mut outputs = outs.to_vec();
    outputs.push(ctx.path(INGEST_REPORT));
    ctx.finish("ingest", &[songs, artists, users, profiles], &outputs, started)
}

/// Language filter, top-n songs per artist, minimum likes.
pub fn filter(ctx: &mut Ctx) -> Result<()> {
    let started = Instant::now();
    let inputs = [
        ctx.require(INGESTED_SONGS, "ingest")?,
        ctx.require(INGESTED_ARTISTS, "ingest")?,
        ctx.require(INGESTED_USERS, "ingest")?,
    ];
    let (corpus, _) = load_corpus(&inputs[0], &inputs[1], &inputs[2])?;
    let (kept, report) = filter_corpus(&corpus, &ctx.cfg.filter_params());
    ctx.ensure_dir("filtered")?;
    let outs = [ctx.path(FILTERED_SONGS), ctx.path(FILTERED_ARTISTS), ctx.path(FILTERED_USERS)];
    write_corpus(&kept, &outs[0], &outs[1], &outs[2])?;
    write_json(&ctx.path(FILTER_REPORT), &report)?;
    let mut outputs = outs.to_vec();
    outputs.push(ctx.path(FILTER_REPORT));
    ctx.finish("filter", &inputs, &outputs, started)
}

/// Write a planted-signal cohort to the configured corpus paths, and the
/// per-user planted values to `synth_truth.csv`.
pub fn synth(ctx: &mut Ctx) -> Result<()> {
    let started = Instant::now();
    let pipe = load_pipeline(ctx)?;
    let params = SynthParams {
        seed: derive_seed(ctx.cfg.seed, &[stream::SYNTH]),
        ..ctx.cfg.synth.clone()
    };
    let cohort = synthesize(&params, &pipe)?;
    let p = ctx.cfg.paths.clone();
    for f in [&p.songs, &p.artists, &p.users] {
        if let Some(dir) = f.parent() {
            fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
    }
    write_corpus(&cohort.corpus, &p.songs, &p.artists, &p.users)?;
    let truth = ctx.path(SYNTH_TRUTH);
    let rows = cohort
        .corpus
        .users
        .iter()
        .zip(cohort.signal.iter().zip(&cohort.planted))
        .map(|(u, (s, t))| vec![u.user_id.clone(), num(*s), num(*t)]);
    write_csv(&truth, &strings(&["user_id", "signal", "planted"]), rows)?;
    ctx.finish("synth", &pipeline_inputs(ctx), &[p.songs, p.artists, p.users, truth], started)
}
