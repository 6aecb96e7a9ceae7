//! `manifest.json`: per-stage input and output digests under one config hash.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::PipelineConfig;
use crate::error::{CliError, Result};

pub const MANIFEST: &str = "manifest.json";

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub config_hash: String,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub seconds: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config_hash: String,
    pub seed: u64,
    pub stages: BTreeMap<String, StageRecord>,
}

pub fn digest_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Everything a stage needs: the config, its hash, the output directory and
/// the manifest loaded from it.
pub struct Ctx {
    pub cfg: PipelineConfig,
    pub hash: String,
    pub out: PathBuf,
    manifest: RunManifest,
}

impl Ctx {
    pub fn new(cfg: PipelineConfig) -> Result<Self> {
        let out = cfg.output_dir.clone();
        fs::create_dir_all(&out).map_err(|e| CliError::io(&out, e))?;
        let path = out.join(MANIFEST);
        let manifest = if path.exists() {
            let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("unreadable manifest {}: {e}", path.display())))?
        } else {
            RunManifest::default()
        };
        Ok(Ctx {
            hash: cfg.hash(),
            cfg,
            out,
            manifest,
        })
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.out.join(rel)
    }

    /// An artifact produced by `stage` under the current config, unmodified
    /// since.
    pub fn require(&self, rel: &str, stage: &'static str) -> Result<PathBuf> {
        let path = self.path(rel);
        if !path.exists() {
            return Err(CliError::MissingArtifact { path, stage });
        }
        let stale = |reason: String| CliError::StaleInput {
            path: path.clone(),
            stage,
            reason,
        };
        let Some(rec) = self.manifest.stages.get(stage) else {
            return Err(stale(format!("no manifest record for stage `{stage}`")));
        };
        if rec.config_hash != self.hash {
            return Err(stale("produced under a different config".into()));
        }
        match rec.outputs.get(rel) {
            None => Err(stale(format!("not among the recorded outputs of `{stage}`"))),
            Some(d) if *d != digest_file(&path)? => Err(stale("modified since it was written".into())),
            Some(_) => Ok(path),
        }
    }

    /// An input outside the output directory; it must exist.
    pub fn external(&self, path: &Path) -> Result<PathBuf> {
        if !path.exists() {
            return Err(CliError::Config(format!("input {} does not exist", path.display())));
        }
        Ok(path.to_path_buf())
    }

    pub fn ensure_dir(&self, rel: &str) -> Result<PathBuf> {
        let p = self.path(rel);
        fs::create_dir_all(&p).map_err(|e| CliError::io(&p, e))?;
        Ok(p)
    }

    fn key(&self, p: &Path) -> String {
        p.strip_prefix(&self.out).unwrap_or(p).to_string_lossy().replace('\\', "/")
    }

    fn digest_entry(&self, p: &Path) -> Result<Vec<(String, String)>> {
        if p.is_dir() {
            let mut files: Vec<PathBuf> = fs::read_dir(p)
                .map_err(|e| CliError::io(p, e))?
                .map(|e| e.map(|e| e.path()))
                .collect::<std::io::Result<_>>()
                .map_err(|e| CliError::io(p, e))?;
            files.sort();
            let mut out = Vec::new();
            for f in files {
                out.extend(self.digest_entry(&f)?);
            }
            Ok(out)
        } else {
            Ok(vec![(self.key(p), digest_file(p)?)])
        }
    }

    /// Record a finished stage and rewrite the manifest.
    pub fn finish(&mut self, stage: &str, inputs: &[PathBuf], outputs: &[PathBuf], started: Instant) -> Result<()> {
        let mut rec = StageRecord {
            config_hash: self.hash.clone(),
            seconds: started.elapsed().as_secs_f64(),
            ..Default::default()
        };
        for p in inputs {
            rec.inputs.extend(self.digest_entry(p)?);
        }
        for p in outputs {
            rec.outputs.extend(self.digest_entry(p)?);
        }
        self.manifest.tool_version = env!("CARGO_PKG_VERSION").to_string();
        self.manifest.config_hash = self.hash.clone();
        self.manifest.seed = self.cfg.seed;
        self.manifest.stages.insert(stage.to_string(), rec);
        let path = self.out.join(MANIFEST);
        let mut text = serde_json::to_string_pretty(&self.manifest).expect("manifest serialises");
        text.push('\n');
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))
    }
}
