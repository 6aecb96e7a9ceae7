//! `moralens`: staged pipeline from lyrics and listening histories to
//! per-listener moral-foundation models.

mod commands;
mod config;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{PipelineConfig, TopicCount};
use crate::error::{CliError, Result};
use crate::manifest::Ctx;

#[derive(Parser)]
#[command(name = "moralens", version, about)]
struct Cli {
    /// Pipeline config (TOML).
    #[arg(long, short, global = true, default_value = "moralens.toml")]
    config: PathBuf,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Override the master seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Load the raw corpus and tag every song with a language.
    Ingest,
    /// Keep English songs, top artists and active users.
    Filter,
    /// Lemmatize lyrics and score the lexicons per song.
    Extract,
    /// Coherence scan over the topic-count grid.
    SelectK,
    /// Fit the final topic model.
    TrainLda,
    /// Per-song topic mixtures, then per-user feature rows.
    Aggregate,
    /// Cross-validated correlation for every experiment and target.
    Evaluate,
    /// Fit final models on all users.
    Train,
    /// Out-of-fold SHAP values, grouped contributions and permutation importance.
    Explain,
    /// Rank-correlation screen of lyrical features against targets.
    Correlate,
    /// Write a synthetic corpus with a planted signal to the configured input paths.
    Synth,
    /// Every stage from ingest to correlate.
    Run,
}

fn stage(ctx: &mut Ctx, c: Command) -> Result<()> {
    match c {
        Command::Ingest => commands::ingest(ctx),
        Command::Filter => commands::filter(ctx),
        Command::Extract => commands::extract(ctx),
        Command::SelectK => commands::select_k(ctx),
        Command::TrainLda => commands::train_lda(ctx),
        Command::Aggregate => commands::aggregate(ctx),
        Command::Evaluate => commands::evaluate(ctx),
        Command::Train => commands::train(ctx),
        Command::Explain => commands::explain(ctx),
        Command::Correlate => commands::correlate(ctx),
        Command::Synth => commands::synth(ctx),
        Command::Run => {
            let mut plan = vec![Command::Ingest, Command::Filter, Command::Extract];
            if matches!(ctx.cfg.topics.k, TopicCount::Auto(_)) {
                plan.push(Command::SelectK);
            }
            plan.extend([
                Command::TrainLda,
                Command::Aggregate,
                Command::Evaluate,
                Command::Train,
                Command::Explain,
                Command::Correlate,
            ]);
            for c in plan {
                eprintln!("moralens: {}", name(c));
                stage(ctx, c)?;
            }
            Ok(())
        }
    }
}

fn name(c: Command) -> &'static str {
    match c {
        Command::Ingest => "ingest",
        Command::Filter => "filter",
        Command::Extract => "extract",
        Command::SelectK => "select-k",
        Command::TrainLda => "train-lda",
        Command::Aggregate => "aggregate",
        Command::Evaluate => "evaluate",
        Command::Train => "train",
        Command::Explain => "explain",
        Command::Correlate => "correlate",
        Command::Synth => "synth",
        Command::Run => "run",
    }
}

fn main_inner(cli: Cli) -> Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let mut cfg = PipelineConfig::load(&cli.config)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let mut ctx = Ctx::new(cfg)?;
    stage(&mut ctx, cli.command)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("moralens: error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
