//! Pipeline configuration (TOML). Relative paths resolve against the
//! directory holding the config file.

use std::path::{Path, PathBuf};

use moralens_core::corpus::FilterParams;
use moralens_core::features::{Aggregation, ExperimentId};
use moralens_core::lexicons::{EmotionAveraging, MoralFallback};
use moralens_core::models::{ElasticNetParams, ForestParams, ModelFamily, PValueMethod};
use moralens_core::synth::SynthParams;
use moralens_core::Target;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    pub songs: PathBuf,
    pub artists: PathBuf,
    pub users: PathBuf,
    pub lexicons: PathBuf,
    pub lemmas: PathBuf,
    pub stopwords: PathBuf,
    pub language_profiles: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    /// Most popular songs kept per artist.
    pub top_n: usize,
    /// Users with fewer artist likes are dropped.
    pub min_likes: usize,
    pub language: String,
}

impl Default for FilterConfig {
    fn default() -> Self {
        let d = FilterParams::default();
        FilterConfig {
            top_n: d.top_n,
            min_likes: d.min_likes,
            language: d.language,
        }
    }
}

/// `k = "auto"` takes the coherence-selected value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TopicCount {
    Fixed(usize),
    Auto(AutoK),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoK {
    Auto,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopicsConfig {
    pub max_df: f64,
    pub min_df: usize,
    pub k: TopicCount,
    pub grid: Vec<usize>,
    /// Independent sampler runs per grid value.
    pub n_seeds: usize,
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    /// `None` means `50 / k`.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub coherence_top_n: usize,
    pub coherence_window: usize,
    pub fold_in_iterations: usize,
}

impl Default for TopicsConfig {
    fn default() -> Self {
        TopicsConfig {
            max_df: 0.9,
            min_df: 2,
            k: TopicCount::Auto(AutoK::Auto),
            grid: (2..=20).collect(),
            n_seeds: 3,
            iterations: 1000,
            burn_in: 200,
            thin: 10,
            alpha: None,
            beta: 0.01,
            coherence_top_n: 10,
            coherence_window: 110,
            fold_in_iterations: 100,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeaturesConfig {
    pub aggregation: Aggregation,
    pub emotion_averaging: EmotionAveraging,
    pub moral_fallback: MoralFallback,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    #[default]
    Forest,
    ElasticNet,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub family: Family,
    pub forest: ForestParams,
    pub elastic_net: ElasticNetParams,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            family: Family::Forest,
            forest: ForestParams::default(),
            elastic_net: ElasticNetParams::default(),
        }
    }
}

impl ModelConfig {
    pub fn family(&self) -> ModelFamily {
        match self.family {
            Family::Forest => ModelFamily::Forest(self.forest.clone()),
            Family::ElasticNet => ModelFamily::ElasticNet(self.elastic_net.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CvConfig {
    pub folds: usize,
    pub repeats: usize,
    pub targets: Vec<Target>,
    /// Also evaluate every experiment on row-permuted targets.
    pub control: bool,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            folds: 5,
            repeats: 20,
            targets: Target::ALL.to_vec(),
            control: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentsConfig {
    pub run: Vec<ExperimentId>,
}

impl Default for ExperimentsConfig {
    fn default() -> Self {
        ExperimentsConfig {
            run: ExperimentId::ALL.to_vec(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExplainConfig {
    pub experiment: ExperimentId,
    pub targets: Vec<Target>,
    pub top_n: usize,
    pub folds: usize,
    pub importance_repeats: usize,
}

impl Default for ExplainConfig {
    fn default() -> Self {
        ExplainConfig {
            experiment: ExperimentId::Ex8,
            targets: Target::ALL.to_vec(),
            top_n: 8,
            folds: 5,
            importance_repeats: 10,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PMethod {
    #[default]
    TDist,
    Permutation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorrelateConfig {
    pub alpha: f64,
    pub method: PMethod,
    pub draws: usize,
}

impl Default for CorrelateConfig {
    fn default() -> Self {
        CorrelateConfig {
            alpha: 0.01,
            method: PMethod::TDist,
            draws: 10_000,
        }
    }
}

impl CorrelateConfig {
    pub fn method(&self, seed: u64) -> PValueMethod {
        match self.method {
            PMethod::TDist => PValueMethod::TDist,
            PMethod::Permutation => PValueMethod::Permutation {
                draws: self.draws,
                seed,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub seed: u64,
    pub output_dir: PathBuf,
    pub paths: Paths,
    #[serde(default)]
    pub filter: FilterConfig,
    #[serde(default)]
    pub topics: TopicsConfig,
    #[serde(default)]
    pub features: FeaturesConfig,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub cv: CvConfig,
    #[serde(default)]
    pub experiments: ExperimentsConfig,
    #[serde(default)]
    pub explain: ExplainConfig,
    #[serde(default)]
    pub correlate: CorrelateConfig,
    #[serde(default)]
    pub synth: SynthParams,
}

impl PipelineConfig {
    pub fn parse(text: &str, base: &Path) -> Result<Self, CliError> {
        let mut cfg: PipelineConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut cfg.output_dir);
        for p in [
            &mut cfg.paths.songs,
            &mut cfg.paths.artists,
            &mut cfg.paths.users,
            &mut cfg.paths.lexicons,
            &mut cfg.paths.lemmas,
            &mut cfg.paths.stopwords,
            &mut cfg.paths.language_profiles,
        ] {
            fix(p);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        PipelineConfig::parse(&text, base)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if !(self.topics.max_df > 0.0 && self.topics.max_df <= 1.0) {
            return bad(format!("topics.max_df must be in (0, 1], got {}", self.topics.max_df));
        }
        if self.topics.grid.is_empty() || self.topics.grid.contains(&0) || self.topics.n_seeds == 0 {
            return bad("topics.grid needs positive values and topics.n_seeds must be positive".into());
        }
        if self.cv.folds < 2 || self.cv.repeats == 0 || self.cv.targets.is_empty() {
            return bad("cv needs folds >= 2, repeats >= 1 and at least one target".into());
        }
        if self.experiments.run.is_empty() {
            return bad("experiments.run is empty".into());
        }
        if self.explain.folds < 2 || self.explain.importance_repeats == 0 {
            return bad("explain needs folds >= 2 and importance_repeats >= 1".into());
        }
        if !(self.correlate.alpha > 0.0 && self.correlate.alpha <= 1.0) {
            return bad(format!("correlate.alpha must be in (0, 1], got {}", self.correlate.alpha));
        }
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON form of the resolved config.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serialises");
        hex::encode(Sha256::digest(&json))
    }

    pub fn filter_params(&self) -> FilterParams {
        FilterParams {
            top_n: self.filter.top_n,
            min_likes: self.filter.min_likes,
            language: self.filter.language.clone(),
        }
    }
}
