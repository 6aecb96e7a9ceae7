use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use moralens_core::corpus::{load_corpus, Corpus};
use moralens_core::features::{aggregate_user, lexical_scores, lyrical_labels, UserFeatures};
use moralens_core::topics::{build_vocab, coherence_cv, infer_topics, select_k as run_select_k, train_lda as fit_lda, LdaModel, LdaParams};
use moralens_core::util::{derive_seed, derive_seed_str};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::table::{num, parse_num, strings, write_csv, write_users, Table};
use super::*;
use crate::config::TopicCount;
use crate::error::CliError;

#[derive(Serialize, Deserialize)]
struct LemmaRecord {
    song_id: String,
    word_count: usize,
    lemmas: Vec<String>,
}

fn load_filtered(ctx: &Ctx) -> Result<(Corpus, Vec<std::path::PathBuf>)> {
    let inputs = vec![
        ctx.require(FILTERED_SONGS, "filter")?,
        ctx.require(FILTERED_ARTISTS, "filter")?,
        ctx.require(FILTERED_USERS, "filter")?,
    ];
    let (corpus, _) = load_corpus(&inputs[0], &inputs[1], &inputs[2])?;
    Ok((corpus, inputs))
}

fn read_lemmas(path: &Path) -> Result<Vec<(String, Vec<String>)>> {
    let f = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    BufReader::new(f)
        .lines()
        .map(|line| {
            let line = line.map_err(|e| CliError::io(path, e))?;
            let rec: LemmaRecord = serde_json::from_str(&line).map_err(|e| CliError::csv(path, e))?;
            Ok((rec.song_id, rec.lemmas))
        })
        .collect()
}

fn lda_params(ctx: &Ctx, k: usize, seed: u64) -> LdaParams {
    let t = &ctx.cfg.topics;
    LdaParams {
        k,
        alpha: t.alpha,
        beta: t.beta,
        iterations: t.iterations,
        burn_in: t.burn_in,
        thin: t.thin,
        seed,
    }
}

/// Lemma streams and lexical scores (morals, sentiment, emotions) per song.
pub fn extract(ctx: &mut Ctx) -> Result<()> {
    let started = Instant::now();
    let (corpus, mut inputs) = load_filtered(ctx)?;
    let pipe = load_pipeline(ctx)?;
    let songs: Vec<_> = corpus.songs().collect();
    let done: Vec<(LemmaRecord, Vec<f64>)> = songs
        .par_iter()
        .map(|s| {
            let lemmas = pipe.lemmatize(&s.lyrics);
            let rec = LemmaRecord {
                song_id: s.song_id.clone(),
                word_count: lemmas.word_count,
                lemmas: lemmas.lemmas,
            };
            (rec, lexical_scores(&s.lyrics, &pipe).to_vec())
        })
        .collect();

    let lemma_path = ctx.path(LEMMAS);
    let file = fs::File::create(&lemma_path).map_err(|e| CliError::io(&lemma_path, e))?;
    let mut w = BufWriter::new(file);
    for (rec, _) in &done {
        let line = serde_json::to_string(rec).expect("lemma record serialises");
        writeln!(w, "{line}").map_err(|e| CliError::io(&lemma_path, e))?;
    }
    w.flush().map_err(|e| CliError::io(&lemma_path, e))?;

    let lex_path = ctx.path(SONG_LEXICAL);
    let mut header = strings(&["song_id"]);
    header.extend(lyrical_labels(0));
    let rows = done.iter().map(|(rec, v)| {
        let mut r = vec![rec.song_id.clone()];
        r.extend(v.iter().map(|&x| num(x)));
        r
    });
    write_csv(&lex_path, &header, rows)?;
    inputs.extend(pipeline_inputs(ctx));
    ctx.finish("extract", &inputs, &[lemma_path, lex_path], started)
}

/// Mean C_v over seeds for every topic count of the grid.
pub fn select_k(ctx: &mut Ctx) -> Result<()> {
    let started = Instant::now();
    let input = ctx.require(LEMMAS, "extract")?;
    let docs: Vec<Vec<String>> = read_lemmas(&input)?.into_iter().map(|(_, l)| l).collect();
    let t = ctx.cfg.topics.clone();
    let (vocab, dtm) = build_vocab(&docs, t.max_df, t.min_df)?;
    let seeds: Vec<u64> = (0..t.n_seeds as u64).map(|s| derive_seed(ctx.cfg.seed, &[stream::SELECT_K, s])).collect();
    let base = lda_params(ctx, t.grid[0], 0);
    let sel = run_select_k(&vocab, &dtm, &docs, &t.grid, &seeds, &base, t.coherence_top_n, t.coherence_window)?;

    let runs = ctx.path(SELECT_K_RUNS);
    write_csv(
        &runs,
        &strings(&["k", "seed", "mean_cv"]),
        sel.runs.iter().map(|r| vec![r.k.to_string(), r.seed.to_string(), num(r.mean_cv)]),
    )?;
    let summary = ctx.path(SELECT_K);
    write_csv(
        &summary,
        &strings(&["k", "mean_cv", "selected"]),
        sel.by_k
            .iter()
            .map(|&(k, cv)| vec![k.to_string(), num(cv), u8::from(k == sel.best_k).to_string()]),
    )?;
    ctx.finish("select-k", &[input], &[runs, summary], started)
}

fn selected_k(ctx: &Ctx) -> Result<(usize, Option<std::path::PathBuf>)> {
    match ctx.cfg.topics.k {
        TopicCount::Fixed(k) => Ok((k, None)),
        TopicCount::Auto(_) => {
            let path = ctx.require(SELECT_K, "select-k")?;
            let t = Table::read(&path)?;
            let (ck, cs) = (t.column("k", &path)?, t.column("selected", &path)?);
            let row = t
                .rows
                .iter()
                .find(|r| r[cs] == "1")
                .ok_or_else(|| CliError::csv(&path, "no selected k"))?;
            let k = row[ck].parse().map_err(|_| CliError::csv(&path, "bad k"))?;
            Ok((k, Some(path)))
        }
    }
}

/// Fit the final topic model and write its top words.
pub fn train_lda(ctx: &mut Ctx) -> Result<()> {
    let started = Instant::now();
    let input = ctx.require(LEMMAS, "extract")?;
    let (k, sel_path) = selected_k(ctx)?;
    let docs: Vec<Vec<String>> = read_lemmas(&input)?.into_iter().map(|(_, l)| l).collect();
    let t = ctx.cfg.topics.clone();
    let (vocab, dtm) = build_vocab(&docs, t.max_df, t.min_df)?;
    let model = fit_lda(&vocab, &dtm, &lda_params(ctx, k, derive_seed(ctx.cfg.seed, &[stream::LDA])))?;
    let model_path = ctx.path(LDA_MODEL);
    model.save(&model_path)?;

    let topics_path = ctx.path(TOPICS);
    let mut rows = Vec::new();
    for topic in 0..k {
        for (rank, w) in model.top_words(topic, 20).into_iter().enumerate() {
            rows.push(vec![
                (topic + 1).to_string(),
                (rank + 1).to_string(),
                model.vocab.word(w).to_string(),
                num(model.phi[topic][w]),
            ]);
        }
    }
    write_csv(&topics_path, &strings(&["topic", "rank", "word", "weight"]), rows)?;

    let coh = coherence_cv(&model, &docs, t.coherence_top_n, t.coherence_window)?;
    let prevalence = model.prevalence();
    let summary_path = ctx.path(TOPIC_SUMMARY);
    write_csv(
        &summary_path,
        &strings(&["topic", "prevalence", "coherence_cv", "top_words"]),
        (0..k).map(|i| vec![(i + 1).to_string(), num(prevalence[i]), num(coh.per_topic[i]), coh.top_words[i].join(" ")]),
    )?;
    let mut inputs = vec![input];
    inputs.extend(sel_path);
    ctx.finish("train-lda", &inputs, &[model_path, topics_path, summary_path], started)
}

fn read_lexical(path: &Path) -> Result<HashMap<String, Vec<f64>>> {
    let t = Table::read(path)?;
    let mut expected = strings(&["song_id"]);
    expected.extend(lyrical_labels(0));
    if t.header != expected {
        return Err(CliError::csv(path, "unexpected header"));
    }
    t.rows
        .iter()
        .map(|r| Ok((r[0].clone(), r[1..].iter().map(|s| parse_num(s, path)).collect::<Result<Vec<_>>>()?)))
        .collect()
}

/// Topic fold-in per song, the full song vectors, and per-user aggregation.
pub fn aggregate(ctx: &mut Ctx) -> Result<()> {
    let started = Instant::now();
    let (corpus, mut inputs) = load_filtered(ctx)?;
    let lemma_path = ctx.require(LEMMAS, "extract")?;
    let lex_path = ctx.require(SONG_LEXICAL, "extract")?;
    let model_path = ctx.require(LDA_MODEL, "train-lda")?;
    let lemmas: HashMap<String, Vec<String>> = read_lemmas(&lemma_path)?.into_iter().collect();
    let lexical = read_lexical(&lex_path)?;
    let model = LdaModel::load(&model_path)?;
    let k = model.k;
    let fold_seed = derive_seed(ctx.cfg.seed, &[stream::FOLD_IN]);
    let iterations = ctx.cfg.topics.fold_in_iterations;

    let songs: Vec<_> = corpus.songs().collect();
    let vectors: Vec<(String, Vec<f64>)> = songs
        .par_iter()
        .map(|s| {
            let missing = || CliError::Config(format!("song `{}` missing from extract outputs; re-run extract", s.song_id));
            let l = lemmas.get(&s.song_id).ok_or_else(missing)?;
            let lex = lexical.get(&s.song_id).ok_or_else(missing)?;
            let mut v = infer_topics(&model, l, iterations, derive_seed_str(fold_seed, &s.song_id));
            v.extend(lex);
            Ok((s.song_id.clone(), v))
        })
        .collect::<Result<_>>()?;

    let song_path = ctx.path(SONG_FEATURES);
    let mut header = strings(&["song_id"]);
    header.extend(lyrical_labels(k));
    write_csv(
        &song_path,
        &header,
        vectors.iter().map(|(id, v)| std::iter::once(id.clone()).chain(v.iter().map(|&x| num(x))).collect()),
    )?;

    let map: HashMap<String, Vec<f64>> = vectors.into_iter().collect();
    let users: Vec<UserFeatures> = corpus
        .users
        .iter()
        .map(|u| aggregate_user(u, &map, &corpus.catalog, ctx.cfg.features.aggregation))
        .collect::<std::result::Result<_, _>>()?;
    let user_path = ctx.path(USER_FEATURES);
    write_users(&user_path, &users, k)?;
    inputs.extend([lemma_path, lex_path, model_path]);
    ctx.finish("aggregate", &inputs, &[song_path, user_path], started)
}
