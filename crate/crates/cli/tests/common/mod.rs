#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").canonicalize().unwrap()
}

/// A config rooted at `dir`: synthetic inputs under `dir/in`, outputs under
/// `dir/out`, shipped lexicons and profiles. `extra` is appended verbatim.
pub fn write_config(dir: &Path, extra: &str) -> PathBuf {
    let d = data_dir();
    fs::create_dir_all(dir.join("in")).unwrap();
    let text = format!(
        r#"seed = 11
output_dir = "out"

[paths]
songs = "in/songs.jsonl"
artists = "in/artists.jsonl"
users = "in/users.jsonl"
lexicons = "{lex}"
lemmas = "{lem}"
stopwords = "{stop}"
language_profiles = "{lang}"

{extra}
"#,
        lex = d.join("lexicons").display(),
        lem = d.join("lemmas.tsv").display(),
        stop = d.join("stopwords.txt").display(),
        lang = d.join("langid").display(),
    );
    let path = dir.join("moralens.toml");
    fs::write(&path, text).unwrap();
    path
}

pub fn moralens(config: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_moralens"))
        .arg("--config")
        .arg(config)
        .args(args)
        .output()
        .expect("binary runs")
}

/// Run and insist on success.
pub fn ok(config: &Path, args: &[&str]) {
    let out = moralens(config, args);
    assert!(
        out.status.success(),
        "moralens {args:?} failed ({:?}): {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Minimal CSV reader for the tool's own outputs (no quoting).
pub fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

/// Every file under `root`, keyed by relative path.
pub fn snapshot(root: &Path) -> Vec<(String, Vec<u8>)> {
    fn walk(root: &Path, dir: &Path, out: &mut Vec<(String, Vec<u8>)>) {
        let mut entries: Vec<_> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
        entries.sort();
        for p in entries {
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.push((rel, fs::read(&p).unwrap()));
            }
        }
    }
    let mut out = Vec::new();
    walk(root, root, &mut out);
    out
}

pub const STAGES: [&str; 10] = [
    "ingest",
    "filter",
    "extract",
    "select-k",
    "train-lda",
    "aggregate",
    "evaluate",
    "train",
    "explain",
    "correlate",
];
