//! Acceptance suite. Each test prints one `PASS` or `FAIL` line, then fails
//! the test on `FAIL`.

mod common;

use std::collections::{HashMap, HashSet};
use std::fs;
use std::io::Write;
use std::time::{Duration, Instant};

use moralens_core::explain::{brute_shapley, explain_rows, tree_shap};
use moralens_core::features::{lexical_scores, TextPipeline};
use moralens_core::lexicons::{score_moral, score_sentiment, Lexicons, MoralFallback, SentimentLexicon};
use moralens_core::models::{
    pearson, spearman, train_elasticnet, train_forest, ElasticNetParams, ForestParams,
};
use moralens_core::textprep::{tokenize_preserving, LemmaTable, Stopwords};
use moralens_core::topics::{build_vocab, select_k, train_lda, LdaParams};
use moralens_core::util::stream_rng;
use ndarray::Array2;
use rand::Rng;
use rand_distr::{Dirichlet, Distribution, StandardNormal};

use common::*;

type Check = Result<String, String>;

fn report(n: usize, title: &str, started: Instant, limit: Option<Duration>, check: Check) {
    let elapsed = started.elapsed();
    let check = match (check, limit) {
        (Ok(_), Some(l)) if elapsed > l => Err(format!("took {elapsed:.1?}, limit {l:?}")),
        (c, _) => c,
    };
    let (status, detail) = match &check {
        Ok(d) => ("PASS", d.as_str()),
        Err(d) => ("FAIL", d.as_str()),
    };
    // bypasses libtest output capture so the line always shows
    let mut out = std::io::stdout().lock();
    writeln!(out, "acceptance {n} [{title}]: {status} ({detail}; {elapsed:.1?})").unwrap();
    out.flush().unwrap();
    drop(out);
    if let Err(e) = check {
        panic!("acceptance {n} failed: {e}");
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn pipeline() -> TextPipeline {
    let d = data_dir();
    TextPipeline {
        lemmas: LemmaTable::load(&d.join("lemmas.tsv")).unwrap(),
        stopwords: Stopwords::load(&d.join("stopwords.txt")).unwrap(),
        lexicons: Lexicons::load_dir(&d.join("lexicons")).unwrap(),
        fold_in_iterations: 50,
    }
}

// 1 -------------------------------------------------------------------------

fn shapley_oracle() -> Check {
    let mut rng = stream_rng(101, 0);
    let mut worst: f64 = 0.0;
    for trial in 0..100u64 {
        let p = rng.random_range(1..=5);
        let n = rng.random_range(30..120);
        let x = Array2::from_shape_fn((n, p), |_| f64::from(rng.random_range(0..8u8)) / 7.0);
        let y: Vec<f64> = (0..n)
            .map(|i| x[[i, 0]] * 3.0 - x[[i, p - 1]] + rng.random_range(-0.5..0.5))
            .collect();
        let forest = train_forest(
            x.view(),
            &y,
            &ForestParams {
                n_trees: rng.random_range(1..=20),
                mtry: Some(rng.random_range(1..=p)),
                min_leaf: rng.random_range(1..5),
                max_depth: Some(rng.random_range(1..=3)),
                bootstrap: true,
                seed: trial,
            },
        )
        .map_err(|e| e.to_string())?;
        for _ in 0..10 {
            let inst: Vec<f64> = (0..p).map(|_| rng.random_range(-0.1..1.1)).collect();
            let fast = tree_shap(&forest, &inst).map_err(|e| e.to_string())?;
            let slow = brute_shapley(&forest, &inst).map_err(|e| e.to_string())?;
            for (a, b) in fast.phi.iter().zip(&slow) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    ensure(worst <= 1e-9, || format!("tree SHAP vs enumeration deviates by {worst:e}"))?;

    let n = 500;
    let x = Array2::from_shape_fn((n, 21), |_| rng.random_range(0.0..1.0));
    let y: Vec<f64> = (0..n).map(|i| (0..21).map(|j| x[[i, j]] * j as f64).sum()).collect();
    let forest = train_forest(
        x.view(),
        &y,
        &ForestParams {
            n_trees: 50,
            seed: 5,
            ..Default::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let rows = Array2::from_shape_fn((1000, 21), |_| rng.random_range(-0.1..1.1));
    let ids: Vec<usize> = (0..1000).collect();
    let gap = explain_rows(&forest, rows.view(), &ids)
        .map_err(|e| e.to_string())?
        .iter()
        .map(|e| e.additivity_gap())
        .fold(0.0, f64::max);
    ensure(gap <= 1e-6, || format!("local accuracy gap {gap:e}"))?;
    Ok(format!("max |tree - brute| {worst:.1e}, max additivity gap {gap:.1e}"))
}

#[test]
fn a1_shapley_oracle_equivalence() {
    let t = Instant::now();
    report(1, "Shapley oracle equivalence", t, Some(Duration::from_secs(120)), shapley_oracle());
}

// 2 -------------------------------------------------------------------------

const PLANTED: usize = 4;
const WORDS_PER_TOPIC: usize = 100;

fn planted_corpus() -> Vec<Vec<String>> {
    let mut rng = stream_rng(202, 0);
    // Zipf weights within a topic make the top words well defined
    let weights: Vec<f64> = (0..WORDS_PER_TOPIC).map(|r| 1.0 / (r as f64 + 1.0)).collect();
    let total: f64 = weights.iter().sum();
    let dir = Dirichlet::new([0.1; PLANTED]).unwrap();
    let draw = |probs: &[f64], scale: f64, u: f64| {
        let mut u = u * scale;
        for (i, p) in probs.iter().enumerate() {
            u -= p;
            if u < 0.0 {
                return i;
            }
        }
        probs.len() - 1
    };
    (0..2000)
        .map(|_| {
            let theta: [f64; PLANTED] = dir.sample(&mut rng);
            (0..60)
                .map(|_| {
                    let t = draw(&theta, 1.0, rng.random());
                    let w = draw(&weights, total, rng.random());
                    format!("t{t}w{w:03}")
                })
                .collect()
        })
        .collect()
}

fn lda_recovery() -> Check {
    let docs = planted_corpus();
    let (vocab, dtm) = build_vocab(&docs, 0.9, 2).map_err(|e| e.to_string())?;
    ensure(vocab.len() == PLANTED * WORDS_PER_TOPIC, || format!("vocabulary has {} words", vocab.len()))?;
    let base = LdaParams::new(2, 0);
    let grid: Vec<usize> = (2..=8).collect();
    let sel = select_k(&vocab, &dtm, &docs, &grid, &[1, 2, 3], &base, 10, 110).map_err(|e| e.to_string())?;
    let by_k: Vec<String> = sel.by_k.iter().map(|(k, c)| format!("{k}:{c:.3}")).collect();
    ensure(sel.best_k == PLANTED, || format!("selected k = {} ({})", sel.best_k, by_k.join(" ")))?;

    let model = train_lda(&vocab, &dtm, &LdaParams::new(PLANTED, 9)).map_err(|e| e.to_string())?;
    for row in model.theta.iter().chain(&model.phi) {
        let s: f64 = row.iter().sum();
        ensure((s - 1.0).abs() <= 1e-9 && row.iter().all(|&v| v >= 0.0), || {
            format!("row off the simplex (sum {s})")
        })?;
    }

    // greedy matching on top-10 overlap
    let learned: Vec<HashSet<String>> =
        (0..PLANTED).map(|t| model.top_terms(t, 10).into_iter().map(String::from).collect()).collect();
    let truth: Vec<HashSet<String>> =
        (0..PLANTED).map(|t| (0..10).map(|w| format!("t{t}w{w:03}")).collect()).collect();
    let mut pairs: Vec<(usize, usize, usize)> = (0..PLANTED)
        .flat_map(|a| (0..PLANTED).map(move |b| (a, b)))
        .map(|(a, b)| (learned[a].intersection(&truth[b]).count(), a, b))
        .collect();
    pairs.sort_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let (mut used_a, mut used_b, mut overlaps) = (HashSet::new(), HashSet::new(), Vec::new());
    for (o, a, b) in pairs {
        if !used_a.contains(&a) && !used_b.contains(&b) {
            used_a.insert(a);
            used_b.insert(b);
            overlaps.push(o);
        }
    }
    let min = *overlaps.iter().min().unwrap();
    ensure(min >= 8, || format!("top-10 overlaps {overlaps:?}"))?;
    Ok(format!("k = 4 selected ({}), top-10 overlaps {overlaps:?}", by_k.join(" ")))
}

#[test]
fn a2_lda_recovery() {
    let t = Instant::now();
    report(2, "LDA recovery", t, Some(Duration::from_secs(300)), lda_recovery());
}

// 3 -------------------------------------------------------------------------

fn toy_lexicon() -> SentimentLexicon {
    let valence = [("good", 1.9), ("bad", -2.5), ("great", 3.1), ("love", 3.2), ("hate", -2.7)]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
    let boosters = [("very", 0.293), ("extremely", 0.293), ("barely", -0.293)]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
    let negations = ["not", "never"].into_iter().map(String::from).collect();
    SentimentLexicon::new(valence, boosters, negations).unwrap()
}

/// Closed-form scores from hand-derived unit valences and the number of
/// exclamation marks: compound = S / sqrt(S^2 + 15) with S pushed away
/// from zero by 0.292 per mark (at most 3); shares use |v| + 1 per
/// polar unit and 1 per neutral unit.
fn closed_form(units: &[f64], bangs: usize) -> [f64; 4] {
    let amp = bangs.min(3) as f64 * 0.292;
    let mut s: f64 = units.iter().sum();
    s += amp * s.signum() * f64::from(u8::from(s != 0.0));
    let compound = (s / (s * s + 15.0).sqrt()).clamp(-1.0, 1.0);
    let pos: f64 = units.iter().filter(|&&v| v > 0.0).map(|v| v + 1.0).sum();
    let neg: f64 = units.iter().filter(|&&v| v < 0.0).map(|v| 1.0 - v).sum();
    let neu = units.iter().filter(|&&v| v == 0.0).count() as f64;
    let (pos, neg) = if pos > neg {
        (pos + amp, neg)
    } else if neg > pos {
        (pos, neg + amp)
    } else {
        (pos, neg)
    };
    let total = pos + neg + neu;
    [pos / total, neu / total, neg / total, compound]
}

fn sentiment_conformance() -> Check {
    let lex = toy_lexicon();
    let neg = -0.74;
    let caps = 0.733;
    let cases: Vec<(&str, Vec<f64>, usize)> = vec![
        ("good", vec![1.9], 0),
        ("bad", vec![-2.5], 0),
        ("table", vec![0.0], 0),
        ("a good", vec![1.9], 0),
        ("good.", vec![1.9], 0),
        ("not good", vec![0.0, 1.9 * neg], 0),
        ("never bad", vec![0.0, -2.5 * neg], 0),
        ("isn't good", vec![0.0, 1.9 * neg], 0),
        ("not not good", vec![0.0, 0.0, 1.9 * neg * neg], 0),
        ("very good", vec![0.0, 1.9 + 0.293], 0),
        ("very bad", vec![0.0, -2.5 - 0.293], 0),
        ("barely good", vec![0.0, 1.9 - 0.293], 0),
        ("very very good", vec![0.0, 0.0, 1.9 + 0.293 + 0.293 * 0.95], 0),
        ("very nice good", vec![0.0, 0.0, 1.9 + 0.293 * 0.95], 0),
        ("extremely", vec![0.0], 0),
        ("not very good", vec![0.0, 0.0, (1.9 + 0.293) * neg], 0),
        ("good bad", vec![1.9, -2.5], 0),
        ("GOOD day", vec![1.9 + caps, 0.0], 0),
        ("GOOD", vec![1.9], 0),
        ("BAD day", vec![-2.5 - caps, 0.0], 0),
        ("VERY good day", vec![0.0, 1.9 + 0.293 + caps, 0.0], 0),
        ("good!", vec![1.9], 1),
        ("bad!!", vec![-2.5], 2),
        ("good!!!!!", vec![1.9], 5),
        ("table!!", vec![0.0], 2),
        ("good but bad", vec![1.9 * 0.5, 0.0, -2.5 * 1.5], 0),
        ("good but great", vec![0.95, 0.0, 3.1 * 1.5], 0),
        ("hate it but love it", vec![-1.35, 0.0, 0.0, 4.8, 0.0], 0),
        ("love good hate", vec![3.2, 1.9, -2.7], 0),
        (":) good", vec![0.0, 1.9], 0),
    ];
    let mut worst: f64 = 0.0;
    for (text, units, bangs) in &cases {
        let got = score_sentiment(&tokenize_preserving(text), &lex).to_array();
        let want = closed_form(units, *bangs);
        for (g, w) in got.iter().zip(&want) {
            let d = (g - w).abs();
            worst = worst.max(d);
            ensure(d <= 1e-4, || format!("`{text}`: got {got:?}, want {want:?}"))?;
        }
    }
    let empty = score_sentiment(&tokenize_preserving(""), &lex).to_array();
    ensure(empty == [0.0; 4], || format!("empty input scored {empty:?}"))?;

    // random streams over the shipped lexicon
    let lex = Lexicons::load_dir(&data_dir().join("lexicons")).unwrap().sentiment;
    let mut pool: Vec<String> = lex.valence.keys().filter(|w| w.len() > 1).cloned().collect();
    pool.extend(lex.boosters.keys().cloned());
    pool.extend(lex.negations.iter().cloned());
    pool.extend(["but", "the", "night", "road", "we"].map(String::from));
    pool.sort();
    let mut rng = stream_rng(303, 0);
    let mut max_dev: f64 = 0.0;
    for _ in 0..10_000 {
        let len = rng.random_range(1..40);
        let tokens: Vec<String> = (0..len)
            .map(|_| {
                let mut w = pool[rng.random_range(0..pool.len())].clone();
                if rng.random_bool(0.1) {
                    w = w.to_uppercase();
                }
                if rng.random_bool(0.1) {
                    w.push_str(&"!".repeat(rng.random_range(1..5)));
                }
                w
            })
            .collect();
        let s = score_sentiment(&tokenize_preserving(&tokens.join(" ")), &lex);
        max_dev = max_dev.max((s.pos + s.neu + s.neg - 1.0).abs());
        ensure((-1.0..=1.0).contains(&s.compound), || format!("compound {} out of range", s.compound))?;
    }
    ensure(max_dev <= 1e-6, || format!("pos + neu + neg deviates from 1 by {max_dev:e}"))?;
    Ok(format!("{} rule cases within {worst:.1e}; share sums within {max_dev:.1e}", cases.len() + 1))
}

#[test]
fn a3_sentiment_rule_conformance() {
    let t = Instant::now();
    report(3, "sentiment rule conformance", t, None, sentiment_conformance());
}

// 4 -------------------------------------------------------------------------

fn moral_fallback() -> Check {
    let pipe = pipeline();
    let moral = &pipe.lexicons.moral;
    let text = fs::read_to_string(data_dir().join("lemmas.tsv")).unwrap();
    let mut misses = HashSet::new();
    let mut hits: Vec<String> = moral.valence.keys().cloned().collect();
    hits.sort();
    for line in text.lines() {
        for w in line.split('\t') {
            let w = w.trim();
            if w.len() > 2
                && w.chars().all(|c| c.is_ascii_lowercase())
                && moral.get(w).is_none()
                && moral.get(pipe.lemmas.lemma(w)).is_none()
            {
                misses.insert(w.to_string());
            }
        }
    }
    let mut misses: Vec<String> = misses.into_iter().collect();
    misses.sort();
    ensure(misses.len() > 100, || format!("only {} lexicon-miss words found", misses.len()))?;

    let mut rng = stream_rng(404, 0);
    for song in 0..500 {
        let len = rng.random_range(0..80);
        let lyric: Vec<&str> = (0..len).map(|_| misses[rng.random_range(0..misses.len())].as_str()).collect();
        let lyric = lyric.join(" ");
        let lemmas = pipe.lemmatize(&lyric);
        for mode in [MoralFallback::PerFoundation, MoralFallback::PerLyric] {
            let v = score_moral(&lemmas, moral, mode).values;
            ensure(v == [5.0; 5], || format!("miss-only song {song} scored {v:?} under {mode:?}"))?;
        }
        let v = lexical_scores(&lyric, &pipe).morals;
        ensure(v == [5.0; 5], || format!("miss-only song {song} scored {v:?} through the pipeline"))?;
    }
    for song in 0..500 {
        let len = rng.random_range(1..80);
        let lyric: Vec<&str> = (0..len)
            .map(|_| {
                if rng.random_bool(0.3) {
                    hits[rng.random_range(0..hits.len())].as_str()
                } else {
                    misses[rng.random_range(0..misses.len())].as_str()
                }
            })
            .collect();
        let lemmas = pipe.lemmatize(&lyric.join(" "));
        for mode in [MoralFallback::PerFoundation, MoralFallback::PerLyric] {
            let v = score_moral(&lemmas, moral, mode).values;
            ensure(v.iter().all(|x| (1.0..=9.0).contains(x)), || format!("mixed song {song} scored {v:?}"))?;
        }
    }
    Ok(format!("500 miss-only songs at (5,5,5,5,5), 500 mixed songs in [1,9]; {} miss words", misses.len()))
}

#[test]
fn a4_moral_neutral_fallback() {
    let t = Instant::now();
    report(4, "moral fallback", t, None, moral_fallback());
}

// 5 -------------------------------------------------------------------------

/// Solve `a x = b` by Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, piv);
        b.swap(c, piv);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            let pivot_row = a[c].clone();
            for (v, pv) in a[r][c..].iter_mut().zip(&pivot_row[c..]) {
                *v -= f * pv;
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

/// Least squares with intercept via the normal equations; intercept last.
fn ols(x: &Array2<f64>, y: &[f64]) -> Vec<f64> {
    let (n, p) = x.dim();
    let col = |i: usize, j: usize| if j == p { 1.0 } else { x[[i, j]] };
    let a = (0..=p).map(|r| (0..=p).map(|c| (0..n).map(|i| col(i, r) * col(i, c)).sum()).collect()).collect();
    let b = (0..=p).map(|r| (0..n).map(|i| col(i, r) * y[i]).sum()).collect();
    solve(a, b)
}

fn regression() -> Check {
    let mut rng = stream_rng(505, 0);
    let mut worst: f64 = 0.0;
    let mut checked_traces = 0;
    for trial in 0..50 {
        let p = rng.random_range(1..=8);
        let n = rng.random_range(p + 10..120);
        let x = Array2::from_shape_fn((n, p), |_| rng.sample::<f64, _>(StandardNormal));
        let y: Vec<f64> = (0..n)
            .map(|i| 1.5 + (0..p).map(|j| x[[i, j]] * (j as f64 - 2.0)).sum::<f64>() + rng.sample::<f64, _>(StandardNormal))
            .collect();
        let fit = train_elasticnet(
            x.view(),
            &y,
            &ElasticNetParams {
                lambda: 0.0,
                mix: 0.5,
                tol: 1e-12,
                max_sweeps: 100_000,
            },
        )
        .map_err(|e| format!("problem {trial}: {e}"))?;
        let want = ols(&x, &y);
        for (g, w) in fit.weights.iter().chain([&fit.intercept]).zip(&want) {
            worst = worst.max((g - w).abs());
        }
        for params in [(0.0, 0.5), (0.05, 0.5), (0.3, 1.0), (0.1, 0.0)] {
            let m = train_elasticnet(
                x.view(),
                &y,
                &ElasticNetParams {
                    lambda: params.0,
                    mix: params.1,
                    tol: 1e-10,
                    max_sweeps: 100_000,
                },
            )
            .map_err(|e| e.to_string())?;
            let mut prev = f64::INFINITY;
            for (s, &o) in m.objective_trace.iter().enumerate() {
                ensure(o <= prev + 1e-12 * prev.abs().max(1.0), || {
                    format!("problem {trial} {params:?}: objective rose at sweep {s}: {prev} -> {o}")
                })?;
                prev = o;
            }
            checked_traces += 1;
        }
    }
    ensure(worst <= 1e-4, || format!("lambda = 0 deviates from OLS by {worst:e}"))?;

    let train_x = Array2::from_shape_fn((400, 1), |_| rng.random_range(0.0..1.0));
    let test_x = Array2::from_shape_fn((400, 1), |_| rng.random_range(0.0..1.0));
    let y = |x: &Array2<f64>| x.column(0).iter().map(|v| 3.0 * v).collect::<Vec<_>>();
    let forest = train_forest(
        train_x.view(),
        &y(&train_x),
        &ForestParams {
            n_trees: 200,
            seed: 5,
            ..Default::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let r = pearson(&forest.predict(test_x.view()), &y(&test_x)).map_err(|e| e.to_string())?;
    ensure(r >= 0.95, || format!("forest out-of-sample r = {r:.4}"))?;
    Ok(format!(
        "max |enet - OLS| {worst:.1e}, {checked_traces} monotone traces, forest r {r:.4}"
    ))
}

#[test]
fn a5_regression_correctness() {
    let t = Instant::now();
    report(5, "regression correctness", t, None, regression());
}

// 6 -------------------------------------------------------------------------

fn cell(path: &std::path::Path, row: impl Fn(&[String]) -> bool, col: &str) -> Result<f64, String> {
    let (h, rows) = read_csv(path);
    let c = h.iter().position(|x| x == col).ok_or(format!("no column {col} in {}", path.display()))?;
    let r = rows.iter().find(|r| row(r)).ok_or(format!("no matching row in {}", path.display()))?;
    r[c].parse().map_err(|_| format!("bad value `{}`", r[c]))
}

fn planted_signal() -> Check {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"[topics]
k = "auto"
grid = [4, 5, 6, 7, 8]
n_seeds = 1
iterations = 200
burn_in = 50

[model.forest]
n_trees = 200

[cv]
repeats = 3
targets = ["binding"]

[experiments]
run = ["EX4"]

[explain]
experiment = "EX4"
targets = ["binding"]
importance_repeats = 3
"#,
    );
    ok(&cfg, &["--threads", "1", "synth"]);
    ok(&cfg, &["--threads", "1", "run"]);
    let out = dir.path().join("out");
    let users = read_csv(&out.join("user_features.csv")).1.len();
    let songs = read_csv(&out.join("song_features.csv")).1.len();
    ensure(users == 1000 && songs == 1500, || format!("{users} users and {songs} songs after filtering"))?;
    let r = cell(&out.join("cv_table.csv"), |r| r[0] == "B", "EX4")?;
    let ctrl = cell(&out.join("cv_control.csv"), |r| r[0] == "EX4" && r[1] == "binding", "mean_r")?;
    ensure(r >= 0.35, || format!("EX4 Binding r = {r:.4}"))?;
    ensure(ctrl.abs() <= 0.1, || format!("permuted control r = {ctrl:.4}"))?;
    Ok(format!("EX4 Binding r = {r:.4}, permuted control r = {ctrl:.4}"))
}

#[test]
fn a6_end_to_end_planted_signal() {
    let t = Instant::now();
    report(6, "end-to-end planted signal", t, Some(Duration::from_secs(600)), planted_signal());
}

// 7 -------------------------------------------------------------------------

fn statistics() -> Check {
    let close = |a: f64, b: f64, what: &str| ensure((a - b).abs() <= 1e-12, || format!("{what}: {a} vs {b}"));
    let p = |a: &[f64], b: &[f64]| pearson(a, b).unwrap();
    let s = |a: &[f64], b: &[f64]| spearman(a, b).unwrap().rho;
    close(p(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]), 1.0, "pearson of a line")?;
    close(p(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), -1.0, "pearson of a falling line")?;
    close(p(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]), 0.8, "pearson swap")?;
    close(p(&[1.0, 2.0, 3.0, 4.0], &[1.0, -1.0, -1.0, 1.0]), 0.0, "pearson orthogonal")?;
    close(s(&[1.0, 2.0, 3.0, 4.0, 5.0], &[1.0, 8.0, 27.0, 64.0, 125.0]), 1.0, "spearman monotone")?;
    close(s(&[1.0, 2.0, 2.0, 3.0], &[1.0, 2.0, 3.0, 4.0]), 3.0 / 10f64.sqrt(), "spearman with ties")?;
    // ranks of b are (1, 3, 2, 4, 5), so sum d^2 = 2
    close(s(&[1.0, 2.0, 3.0, 4.0, 5.0], &[1.0, 4.0, 1.5, 4.5, 5.0]), 1.0 - 12.0 / 120.0, "spearman d^2 form")?;

    let mut rng = stream_rng(707, 0);
    let sims = 10_000;
    let mut hits = 0;
    let mut a = vec![0.0; 1000];
    let mut b = vec![0.0; 1000];
    for _ in 0..sims {
        a.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
        b.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
        if spearman(&a, &b).unwrap().p_value <= 0.01 {
            hits += 1;
        }
    }
    let rate = hits as f64 / sims as f64;
    ensure((rate - 0.01).abs() <= 0.003, || format!("null retention rate {rate}"))?;
    Ok(format!("closed forms exact, null retention {rate:.4}"))
}

#[test]
fn a7_statistics() {
    let t = Instant::now();
    report(7, "statistics", t, None, statistics());
}

// 8 -------------------------------------------------------------------------

fn without_timings(bytes: &[u8]) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_slice(bytes).unwrap();
    if let Some(stages) = v["stages"].as_object_mut() {
        for s in stages.values_mut() {
            s["seconds"] = serde_json::Value::from(0.0);
        }
    }
    v
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"[topics]
k = "auto"
grid = [3, 5]
n_seeds = 2
iterations = 60
burn_in = 20
fold_in_iterations = 30

[model.forest]
n_trees = 20

[cv]
repeats = 2

[explain]
importance_repeats = 2

[correlate]
method = "permutation"
draws = 200

[synth]
users = 150
artists = 40
"#,
    );
    let mut stages = vec!["synth"];
    stages.extend(STAGES);
    let mut runs = Vec::new();
    for threads in ["1", "4", "1"] {
        for s in &stages {
            ok(&cfg, &["--threads", threads, s]);
        }
        runs.push(snapshot(dir.path()));
    }
    let mut files = 0;
    for (run, threads) in runs[1..].iter().zip(["4", "1"]) {
        ensure(run.len() == runs[0].len(), || "file sets differ between runs".into())?;
        for ((pa, a), (pb, b)) in runs[0].iter().zip(run) {
            ensure(pa == pb, || format!("file sets differ: {pa} vs {pb}"))?;
            if pa.ends_with("manifest.json") {
                ensure(without_timings(a) == without_timings(b), || "manifests differ beyond timings".into())?;
            } else {
                ensure(a == b, || format!("{pa} differs between --threads 1 and a rerun with --threads {threads}"))?;
            }
            files += 1;
        }
    }
    let names: HashMap<_, _> = runs[0].iter().map(|(p, _)| (p.as_str(), ())).collect();
    ensure(names.contains_key("out/cv_table.csv") && names.contains_key("out/correlations.csv"), || {
        "pipeline outputs missing".into()
    })?;
    Ok(format!("{} files byte-identical over 3 runs of {} stages", files / 2, stages.len()))
}

#[test]
fn a8_determinism_across_threads() {
    let t = Instant::now();
    report(8, "determinism", t, None, determinism());
}
