use std::path::{Path, PathBuf};

use rolemodel::corpus::{CorpusConfig, DEFAULT_HASHTAGS};
use rolemodel::recommender::{BaselineThresholds, FeatureFlags, FilterMode, TrainConfig};
use rolemodel::sttm::{ConditionalForm, Hyperparams, SamplerConfig, ScanOrder};
use serde::{Deserialize, Serialize};

use crate::Failure;

/// Input and artifact locations. Unset entries fall back to the standard
/// file names inside the output directory.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub documents: Option<PathBuf>,
    pub follows: Option<PathBuf>,
    pub goal_labels: Option<PathBuf>,
    /// Prebuilt sequences (as written by `synth`), used instead of a raw corpus.
    pub sequences: Option<PathBuf>,
    /// Ground-truth profiles for `synth`.
    pub truth: Option<PathBuf>,
    /// Per-user attributes for `recommend` when no raw corpus is given.
    pub users: Option<PathBuf>,
    pub participation: Option<PathBuf>,
    pub discussions: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub profiles: Option<PathBuf>,
    pub decoded: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSection {
    pub course_start: i64,
    pub hashtags: Vec<String>,
}

impl Default for CorpusSection {
    fn default() -> Self {
        Self {
            course_start: 0,
            hashtags: DEFAULT_HASHTAGS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub states: usize,
    pub topics: usize,
    pub alpha: f64,
    pub beta: f64,
    pub nu: f64,
    pub gamma: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        let h = Hyperparams::default();
        Self {
            states: h.states,
            topics: h.topics,
            alpha: h.alpha,
            beta: h.beta,
            nu: h.nu,
            gamma: h.gamma,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerSection {
    pub sweeps: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub scan: ScanOrder,
    pub conditionals: ConditionalForm,
    pub chains: usize,
}

impl Default for SamplerSection {
    fn default() -> Self {
        let s = SamplerConfig::default();
        Self {
            sweeps: s.sweeps,
            burn_in: s.burn_in,
            thin: s.thin,
            scan: s.scan,
            conditionals: s.conditionals,
            chains: 1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSection {
    pub sequences: usize,
    pub length: usize,
    pub vocab_size: usize,
    pub docs_per_step: (usize, usize),
    pub words_per_doc: (usize, usize),
    pub discussions: usize,
    /// Discussions each synthetic user takes part in.
    pub per_user: usize,
}

impl Default for SynthSection {
    fn default() -> Self {
        Self {
            sequences: 200,
            length: 8,
            vocab_size: 200,
            docs_per_step: (1, 3),
            words_per_doc: (5, 15),
            discussions: 40,
            per_user: 6,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalyzeSection {
    pub top_topics: usize,
    pub top_words: usize,
    /// Category labels to draw; empty draws S1, S2, S3 and S7.
    pub categories: Vec<String>,
}

impl Default for AnalyzeSection {
    fn default() -> Self {
        Self {
            top_topics: 3,
            top_words: 10,
            categories: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecommendSection {
    pub mode: String,
    pub features: String,
    pub k: usize,
    pub learning_rate: f64,
    pub regularization: f64,
    pub epochs: usize,
    pub negatives: usize,
    pub init_scale: f64,
    pub goal_threshold: f64,
    pub centrality_threshold: f64,
    pub penalty: f64,
    pub cap: usize,
    pub workload: f64,
    /// Highest-scoring users kept per discussion before filtering.
    pub candidates_per_discussion: usize,
    /// Per-discussion list length of the baseline filters.
    pub top_n: usize,
}

impl Default for RecommendSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        let b = BaselineThresholds::default();
        Self {
            mode: FilterMode::MccfG.label().into(),
            features: FeatureFlags::default().label().into(),
            k: t.k,
            learning_rate: t.learning_rate,
            regularization: t.regularization,
            epochs: t.epochs,
            negatives: t.negatives,
            init_scale: t.init_scale,
            goal_threshold: b.goal_min,
            centrality_threshold: b.centrality_above,
            penalty: 0.1,
            cap: 5,
            workload: 0.0,
            candidates_per_discussion: 10,
            top_n: 3,
        }
    }
}

impl RecommendSection {
    pub fn filter_mode(&self) -> Result<FilterMode, Failure> {
        FilterMode::parse(&self.mode).ok_or_else(|| {
            Failure::input(format!(
                "unknown mode `{}` (expected one of MCCF_G, MCCF_C, MCCF_GC, GoalPart, HighCent, GoalPart_HighCent)",
                self.mode
            ))
        })
    }

    pub fn feature_flags(&self) -> Result<FeatureFlags, Failure> {
        FeatureFlags::parse(&self.features).ok_or_else(|| {
            Failure::input(format!(
                "unknown feature set `{}` (expected one of CAMF, CAMF_G, CAMF_C, CAMF_GC)",
                self.features
            ))
        })
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            k: self.k,
            learning_rate: self.learning_rate,
            regularization: self.regularization,
            epochs: self.epochs,
            negatives: self.negatives,
            init_scale: self.init_scale,
        }
    }
}

/// Everything a run depends on. The output directory is not part of the
/// serialized form, so it does not enter the configuration hash.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    pub paths: Paths,
    pub corpus: CorpusSection,
    pub model: ModelSection,
    pub sampler: SamplerSection,
    pub synth: SynthSection,
    pub analyze: AnalyzeSection,
    pub recommend: RecommendSection,
}

/// Command-line values that take precedence over the configuration file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub states: Option<usize>,
    pub topics: Option<usize>,
    pub sweeps: Option<usize>,
    pub burn_in: Option<usize>,
    pub mode: Option<String>,
    pub features: Option<String>,
    pub chains: Option<usize>,
    pub out: Option<PathBuf>,
}

fn resolve(base: &Path, p: &mut Option<PathBuf>) {
    if let Some(path) = p {
        if path.is_relative() {
            *path = base.join(&*path);
        }
    }
}

impl RunConfig {
    /// Reads a TOML file; relative paths in it are taken relative to the
    /// file's directory.
    pub fn from_file(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let p = &mut cfg.paths;
        for slot in [
            &mut p.documents,
            &mut p.follows,
            &mut p.goal_labels,
            &mut p.sequences,
            &mut p.truth,
            &mut p.users,
            &mut p.participation,
            &mut p.discussions,
            &mut p.model,
            &mut p.profiles,
            &mut p.decoded,
        ] {
            resolve(base, slot);
        }
        resolve(base, &mut cfg.out);
        Ok(cfg)
    }

    pub fn apply(&mut self, o: Overrides) {
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = o.states {
            self.model.states = v;
        }
        if let Some(v) = o.topics {
            self.model.topics = v;
        }
        if let Some(v) = o.sweeps {
            self.sampler.sweeps = v;
        }
        if let Some(v) = o.burn_in {
            self.sampler.burn_in = v;
        }
        if let Some(v) = o.mode {
            self.recommend.mode = v;
        }
        if let Some(v) = o.features {
            self.recommend.features = v;
        }
        if let Some(v) = o.chains {
            self.sampler.chains = v;
        }
        if let Some(v) = o.out {
            self.out = Some(v);
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    /// A configured path, or `name` inside the output directory.
    pub fn path_or_out(&self, configured: &Option<PathBuf>, name: &str) -> PathBuf {
        configured.clone().unwrap_or_else(|| self.out_dir().join(name))
    }

    /// Topic-model hyperparameters for data with the given number of social
    /// categories and document types.
    pub fn hyperparams(&self, categories: usize, doc_types: usize) -> Hyperparams {
        Hyperparams {
            states: self.model.states,
            categories,
            topics: self.model.topics,
            doc_types,
            alpha: self.model.alpha,
            beta: self.model.beta,
            nu: self.model.nu,
            gamma: self.model.gamma,
        }
    }

    pub fn sampler_config(&self) -> SamplerConfig {
        SamplerConfig {
            sweeps: self.sampler.sweeps,
            burn_in: self.sampler.burn_in,
            thin: self.sampler.thin,
            scan: self.sampler.scan,
            conditionals: self.sampler.conditionals,
        }
    }

    pub fn corpus_config(&self) -> CorpusConfig {
        CorpusConfig {
            course_start: self.corpus.course_start,
            hashtags: self.corpus.hashtags.clone(),
        }
    }
}
