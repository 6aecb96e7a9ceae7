use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use moralens_core::explain::{group_map, out_of_fold_shap, permutation_importance, rank_and_group};
use moralens_core::features::{
    build_design_matrix, lyrical_labels, target_matrix, Design, ExperimentId, ExperimentSpec, NormalizationParams,
    UserFeatures,
};
use moralens_core::models::{
    best_base, correlation_screen, cross_validate, fold_indices, permute_rows, train_forest, CvParams, ForestParams,
    TargetCv,
};
use moralens_core::util::derive_seed;
use moralens_core::{Error as CoreError, Target};
use ndarray::{Array2, Axis};

use super::table::{num, read_users, strings, write_csv, Table};
use super::*;
use crate::error::CliError;

fn users(ctx: &Ctx) -> Result<(Vec<UserFeatures>, usize, PathBuf)> {
    let path = ctx.require(USER_FEATURES, "aggregate")?;
    let (u, k) = read_users(&path)?;
    Ok((u, k, path))
}

fn dedup_targets(ts: &[Target]) -> Vec<Target> {
    let mut v = ts.to_vec();
    v.sort();
    v.dedup();
    v
}

fn target_columns(y: &Array2<f64>, targets: &[Target]) -> Array2<f64> {
    y.select(Axis(1), &targets.iter().map(|t| t.index()).collect::<Vec<_>>())
}

fn design(spec: ExperimentSpec, users: &[UserFeatures], k: usize) -> Result<Design> {
    Ok(build_design_matrix(&spec.groups()?, users, k)?)
}

fn read_bases(ctx: &Ctx) -> Result<(BTreeMap<Target, ExperimentId>, PathBuf)> {
    let path = ctx.require(BASES, "evaluate")?;
    let t = Table::read(&path)?;
    let (ct, cb) = (t.column("target", &path)?, t.column("base", &path)?);
    let mut out = BTreeMap::new();
    for r in &t.rows {
        out.insert(r[ct].parse::<Target>()?, r[cb].parse::<ExperimentId>()?);
    }
    Ok((out, path))
}

fn spec_for(ex: ExperimentId, t: Target, bases: &BTreeMap<Target, ExperimentId>) -> Result<ExperimentSpec> {
    if !ex.needs_base() {
        return Ok(ExperimentSpec::new(ex));
    }
    bases
        .get(&t)
        .map(|&b| ExperimentSpec::with_base(ex, b))
        .ok_or_else(|| CoreError::UnresolvedBase(format!("{ex} for target {t}")).into())
}

type CvResults = BTreeMap<(ExperimentId, Target), (Option<ExperimentId>, TargetCv)>;

fn run_experiments(
    ctx: &Ctx,
    exps: &[ExperimentId],
    users: &[UserFeatures],
    k: usize,
    y: &Array2<f64>,
    targets: &[Target],
    bases: &BTreeMap<Target, ExperimentId>,
) -> Result<CvResults> {
    let cvp = CvParams {
        folds: ctx.cfg.cv.folds,
        repeats: ctx.cfg.cv.repeats,
        seed: derive_seed(ctx.cfg.seed, &[stream::CV]),
    };
    let family = ctx.cfg.model.family();
    let mut out = CvResults::new();
    for &ex in exps {
        // targets sharing a base share a design matrix
        let mut groups: BTreeMap<Option<ExperimentId>, Vec<Target>> = BTreeMap::new();
        for &t in targets {
            groups.entry(spec_for(ex, t, bases)?.base).or_default().push(t);
        }
        for (base, ts) in groups {
            let spec = ExperimentSpec { id: ex, base };
            let d = design(spec, users, k)?;
            let yt = target_columns(y, &ts);
            let rep = cross_validate(d.x.view(), yt.view(), &ts, &family, &cvp, ex.name())?;
            for tc in rep.targets {
                out.insert((ex, tc.target), (base, tc));
            }
        }
    }
    Ok(out)
}

/// Repeated k-fold CV of every configured experiment and target, with base
/// resolution for EX4 onwards and an optional permuted-target control.
pub fn evaluate(ctx: &mut Ctx) -> Result<()> {
    let started = Instant::now();
    let (users, k, input) = users(ctx)?;
    let targets = dedup_targets(&ctx.cfg.cv.targets);
    let y = target_matrix(&users);
    let mut run = ctx.cfg.experiments.run.clone();
    if run.iter().any(|e| e.needs_base()) {
        run.extend(ExperimentId::BASES);
    }
    run.sort();
    run.dedup();
    let (first, later): (Vec<_>, Vec<_>) = run.iter().partition(|e| !e.needs_base());

    let mut results = run_experiments(ctx, &first, &users, k, &y, &targets, &BTreeMap::new())?;
    let mut bases = BTreeMap::new();
    if !later.is_empty() {
        for &t in &targets {
            let scores: Vec<(ExperimentId, f64)> =
                ExperimentId::BASES.iter().map(|&b| (b, results[&(b, t)].1.mean_r)).collect();
            bases.insert(t, best_base(&scores).unwrap_or(ExperimentId::Ex1));
        }
        results.extend(run_experiments(ctx, &later, &users, k, &y, &targets, &bases)?);
    }

    let table_path = ctx.path(CV_TABLE);
    let mut header = strings(&["target"]);
    header.extend(run.iter().map(|e| e.name().to_string()));
    let rows = Target::ALL.iter().map(|&t| {
        let mut r = vec![t.code().to_string()];
        r.extend(run.iter().map(|&e| match results.get(&(e, t)) {
            Some((_, tc)) if tc.mean_r.is_nan() => "NA".to_string(),
            Some((_, tc)) => format!("{:.4}", tc.mean_r),
            None => String::new(),
        }));
        r
    });
    write_csv(&table_path, &header, rows)?;

    let long_path = ctx.path(CV_LONG);
    write_csv(
        &long_path,
        &strings(&["experiment", "base", "target", "mean_r", "ci_low", "ci_high", "n_defined", "n_undefined"]),
        results.iter().map(|((e, t), (b, tc))| {
            vec![
                e.name().to_string(),
                b.map(|b| b.name().to_string()).unwrap_or_default(),
                t.name().to_string(),
                num(tc.mean_r),
                num(tc.ci_low),
                num(tc.ci_high),
                (tc.fold_r.len() - tc.undefined).to_string(),
                tc.undefined.to_string(),
            ]
        }),
    )?;

    let folds_path = ctx.path(CV_FOLDS);
    let k_folds = ctx.cfg.cv.folds;
    let mut fold_rows = Vec::new();
    for ((e, t), (_, tc)) in &results {
        for (i, r) in tc.fold_r.iter().enumerate() {
            fold_rows.push(vec![
                e.name().to_string(),
                t.name().to_string(),
                (i / k_folds).to_string(),
                (i % k_folds).to_string(),
                r.map(num).unwrap_or_else(|| "NA".into()),
            ]);
        }
    }
    write_csv(&folds_path, &strings(&["experiment", "target", "repeat", "fold", "r"]), fold_rows)?;

    let bases_path = ctx.path(BASES);
    write_csv(
        &bases_path,
        &strings(&["target", "base", "base_mean_r"]),
        bases.iter().map(|(t, b)| vec![t.name().to_string(), b.name().to_string(), num(results[&(*b, *t)].1.mean_r)]),
    )?;

    let mut outputs = vec![table_path, long_path, folds_path, bases_path];
    if ctx.cfg.cv.control {
        let permuted = permute_rows(y.view(), derive_seed(ctx.cfg.seed, &[stream::CONTROL]));
        let mut control = run_experiments(ctx, &first, &users, k, &permuted, &targets, &BTreeMap::new())?;
        control.extend(run_experiments(ctx, &later, &users, k, &permuted, &targets, &bases)?);
        let control_path = ctx.path(CV_CONTROL);
        write_csv(
            &control_path,
            &strings(&["experiment", "target", "mean_r", "ci_low", "ci_high"]),
            control.iter().map(|((e, t), (_, tc))| {
                vec![e.name().to_string(), t.name().to_string(), num(tc.mean_r), num(tc.ci_low), num(tc.ci_high)]
            }),
        )?;
        outputs.push(control_path);
    } else {
        let stale = ctx.path(CV_CONTROL);
        if stale.exists() {
            fs::remove_file(&stale).map_err(|e| CliError::io(&stale, e))?;
        }
    }
    ctx.finish("evaluate", &[input], &outputs, started)
}

fn fresh_dir(ctx: &Ctx, rel: &str) -> Result<PathBuf> {
    let dir = ctx.path(rel);
    if dir.exists() {
        fs::remove_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    }
    ctx.ensure_dir(rel)
}

fn write_text(path: &Path, text: &[u8]) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Fit one model per configured experiment and target on all users, with
/// normalisation fitted on the same rows.
pub fn train(ctx: &mut Ctx) -> Result<()> {
    let started = Instant::now();
    let (users, k, input) = users(ctx)?;
    let mut inputs = vec![input];
    let run = ctx.cfg.experiments.run.clone();
    let bases = if run.iter().any(|e| e.needs_base()) {
        let (b, p) = read_bases(ctx)?;
        inputs.push(p);
        b
    } else {
        BTreeMap::new()
    };
    let y = target_matrix(&users);
    let family = ctx.cfg.model.family();
    let dir = fresh_dir(ctx, MODELS)?;
    for &ex in &run {
        for t in dedup_targets(&ctx.cfg.cv.targets) {
            let d = design(spec_for(ex, t, &bases)?, &users, k)?;
            let norm = NormalizationParams::fit(d.x.view(), &d.labels);
            let x = norm.apply(d.x.view());
            let yt = y.column(t.index()).to_vec();
            let seed = derive_seed(ctx.cfg.seed, &[stream::TRAIN, ex as u64, t.index() as u64]);
            let model = family.fit(x.view(), &yt, seed)?;
            let stem = format!("{}_{}", ex.name(), t.name());
            write_text(&dir.join(format!("{stem}.model")), &model.to_bytes())?;
            write_text(&dir.join(format!("{stem}.norm")), norm.to_text().as_bytes())?;
        }
    }
    ctx.finish("train", &inputs, &[dir], started)
}

/// Out-of-fold tree SHAP for the configured experiment, the top-feature
/// ranking, grouped contributions, and permutation importance on fold 0.
pub fn explain(ctx: &mut Ctx) -> Result<()> {
    let started = Instant::now();
    let (users, k, input) = users(ctx)?;
    let mut inputs = vec![input];
    let cfg = ctx.cfg.explain.clone();
    let bases = if cfg.experiment.needs_base() {
        let (b, p) = read_bases(ctx)?;
        inputs.push(p);
        b
    } else {
        BTreeMap::new()
    };
    let y = target_matrix(&users);
    let seed = derive_seed(ctx.cfg.seed, &[stream::EXPLAIN]);
    let forest = ForestParams {
        seed,
        ..ctx.cfg.model.forest.clone()
    };
    let dir = fresh_dir(ctx, SHAP_DIR)?;
    let mut summary = Vec::new();
    let mut grouped_rows = Vec::new();
    let mut importance_rows = Vec::new();
    for t in dedup_targets(&cfg.targets) {
        let d = design(spec_for(cfg.experiment, t, &bases)?, &users, k)?;
        let yt = y.column(t.index()).to_vec();
        let ex = out_of_fold_shap(d.x.view(), &yt, &forest, cfg.folds, seed)?;

        let mut header = strings(&["user_id", "base_value", "prediction"]);
        header.extend(d.labels.iter().cloned());
        write_csv(
            &dir.join(format!("{}_{}.csv", cfg.experiment.name(), t.name())),
            &header,
            ex.iter().map(|e| {
                let mut r = vec![users[e.instance].user_id.clone(), num(e.base_value), num(e.prediction)];
                r.extend(e.phi.iter().map(|&v| num(v)));
                r
            }),
        )?;

        let map = group_map(&d.groups);
        let group_of: BTreeMap<usize, &str> =
            map.iter().flat_map(|(g, cols)| cols.iter().map(move |&c| (c, g.as_str()))).collect();
        let (grouped, ranked) = rank_and_group(&ex, &d.labels, &map, d.labels.len())?;
        for (i, r) in ranked.iter().enumerate() {
            summary.push(vec![
                t.name().to_string(),
                (i + 1).to_string(),
                r.label.clone(),
                num(r.mean_abs_phi),
                group_of[&r.feature].to_string(),
                u8::from(i < cfg.top_n).to_string(),
            ]);
        }
        for g in &grouped.groups {
            grouped_rows.push(vec![t.name().to_string(), g.group.clone(), num(g.mean_sum_phi), num(g.mean_sum_abs_phi)]);
        }

        let n = users.len();
        let test = &fold_indices(n, cfg.folds, 0, seed)[0];
        let train_rows: Vec<usize> = (0..n).filter(|i| test.binary_search(i).is_err()).collect();
        let x_train = d.x.select(Axis(0), &train_rows);
        let norm = NormalizationParams::fit(x_train.view(), &d.labels);
        let y_train: Vec<f64> = train_rows.iter().map(|&i| yt[i]).collect();
        let model = train_forest(
            norm.apply(x_train.view()).view(),
            &y_train,
            &ForestParams {
                seed: derive_seed(seed, &[1000 + t.index() as u64]),
                ..forest.clone()
            },
        )?;
        let x_test = norm.apply(d.x.select(Axis(0), test).view());
        let y_test: Vec<f64> = test.iter().map(|&i| yt[i]).collect();
        let imp = permutation_importance(
            &model,
            x_test.view(),
            &y_test,
            cfg.importance_repeats,
            derive_seed(seed, &[2000 + t.index() as u64]),
        )?;
        for i in imp {
            importance_rows.push(vec![t.name().to_string(), d.labels[i.feature].clone(), num(i.mean), num(i.sd)]);
        }
    }
    let summary_path = ctx.path(SHAP_SUMMARY);
    write_csv(
        &summary_path,
        &strings(&["target", "rank", "feature", "mean_abs_phi", "group", "top"]),
        summary,
    )?;
    let groups_path = ctx.path(SHAP_GROUPS);
    write_csv(&groups_path, &strings(&["target", "group", "mean_sum_phi", "mean_sum_abs_phi"]), grouped_rows)?;
    let imp_path = ctx.path(IMPORTANCE);
    write_csv(&imp_path, &strings(&["target", "feature", "mean", "sd"]), importance_rows)?;
    ctx.finish("explain", &inputs, &[dir, summary_path, groups_path, imp_path], started)
}

/// Spearman screen of every lyrical feature against every target.
pub fn correlate(ctx: &mut Ctx) -> Result<()> {
    let started = Instant::now();
    let (users, k, input) = users(ctx)?;
    let labels = lyrical_labels(k);
    let x = Array2::from_shape_fn((users.len(), labels.len()), |(i, j)| users[i].lyrical[j]);
    let y = target_matrix(&users);
    let names: Vec<String> = Target::ALL.iter().map(|t| t.name().to_string()).collect();
    let c = &ctx.cfg.correlate;
    let rows = correlation_screen(
        x.view(),
        &labels,
        y.view(),
        &names,
        c.alpha,
        c.method(derive_seed(ctx.cfg.seed, &[stream::CORRELATE])),
    )?;
    let path = ctx.path(CORRELATIONS);
    write_csv(
        &path,
        &strings(&["feature", "target", "rho", "p_value"]),
        rows.iter().map(|r| vec![r.feature.clone(), r.target.clone(), num(r.rho), num(r.p_value)]),
    )?;
    ctx.finish("correlate", &[input], &[path], started)
}

