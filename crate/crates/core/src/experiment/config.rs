use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::adwin::{Adwin, DEFAULT_DELTA};
use crate::error::{Error, Result};
use crate::learners::{AdaptiveReset, Classifier, HoeffdingTree, HoeffdingTreeParams, LeafPrediction, OnlineBagging};
use crate::rebalance::{Judge, Mode, Rebalancer, RebalancerConfig};
use crate::stream::{BarePipeline, Pipeline, StreamSchema, DEFAULT_SNAPSHOT_EVERY};

pub const DEFAULT_SEEDS: std::ops::Range<u64> = 0..10;
pub const DEFAULT_ENSEMBLE_SIZE: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PipelineKind {
    Cfsmote,
    Csmote,
    Bare,
}

/// Pre-processing stage. Unset fields take the defaults of the chosen kind.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub kind: PipelineKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_neighbors: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_window_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_imbalance_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub situation_testing: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub judge: Option<Judge>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_synthetic_per_step: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adwin_delta: Option<f64>,
}

impl PipelineConfig {
    pub fn of_kind(kind: PipelineKind) -> Self {
        PipelineConfig {
            kind,
            k_neighbors: None,
            min_window_size: None,
            min_imbalance_ratio: None,
            situation_testing: None,
            judge: None,
            max_synthetic_per_step: None,
            adwin_delta: None,
        }
    }

    /// `None` for the bare pipeline.
    pub fn rebalancer_config(&self) -> Option<RebalancerConfig> {
        let mode = match self.kind {
            PipelineKind::Cfsmote => Mode::Cfsmote,
            PipelineKind::Csmote => Mode::Csmote,
            PipelineKind::Bare => return None,
        };
        let d = RebalancerConfig::for_mode(mode);
        Some(RebalancerConfig {
            mode,
            k_neighbors: self.k_neighbors.unwrap_or(d.k_neighbors),
            min_window_size: self.min_window_size.unwrap_or(d.min_window_size),
            min_imbalance_ratio: self.min_imbalance_ratio.unwrap_or(d.min_imbalance_ratio),
            situation_testing: self.situation_testing.unwrap_or(d.situation_testing),
            judge: self.judge.unwrap_or(d.judge),
            max_synthetic_per_step: self.max_synthetic_per_step.unwrap_or(d.max_synthetic_per_step),
            adwin_delta: self.adwin_delta.unwrap_or(d.adwin_delta),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    /// Hoeffding tree replaced whenever its error ADWIN reports an increase.
    HoeffdingAdaptive,
    /// Online bagging of adaptive Hoeffding trees.
    Bagging,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerConfig {
    pub kind: LearnerKind,
    #[serde(default = "default_ensemble_size")]
    pub ensemble_size: usize,
    #[serde(default = "default_delta")]
    pub adwin_delta: f64,
    #[serde(default)]
    pub grace_period: Option<u32>,
    #[serde(default)]
    pub split_confidence: Option<f64>,
    #[serde(default)]
    pub tie_threshold: Option<f64>,
    #[serde(default)]
    pub leaf_prediction: Option<LeafPrediction>,
    #[serde(default)]
    pub max_depth: Option<usize>,
}

fn default_ensemble_size() -> usize {
    DEFAULT_ENSEMBLE_SIZE
}

fn default_delta() -> f64 {
    DEFAULT_DELTA
}

impl LearnerConfig {
    pub fn of_kind(kind: LearnerKind) -> Self {
        LearnerConfig {
            kind,
            ensemble_size: DEFAULT_ENSEMBLE_SIZE,
            adwin_delta: DEFAULT_DELTA,
            grace_period: None,
            split_confidence: None,
            tie_threshold: None,
            leaf_prediction: None,
            max_depth: None,
        }
    }

    pub fn tree_params(&self) -> HoeffdingTreeParams {
        let d = HoeffdingTreeParams::default();
        HoeffdingTreeParams {
            grace_period: self.grace_period.unwrap_or(d.grace_period),
            split_confidence: self.split_confidence.unwrap_or(d.split_confidence),
            tie_threshold: self.tie_threshold.unwrap_or(d.tie_threshold),
            leaf_prediction: self.leaf_prediction.unwrap_or(d.leaf_prediction),
            max_depth: self.max_depth.or(d.max_depth),
            ..d
        }
    }

    pub fn build(&self, schema: &StreamSchema, seed: u64) -> Result<Box<dyn Classifier + Send>> {
        let tree = HoeffdingTree::new(schema, self.tree_params())?;
        let adaptive = AdaptiveReset::new(tree, Adwin::new(self.adwin_delta)?);
        Ok(match self.kind {
            LearnerKind::HoeffdingAdaptive => Box::new(adaptive),
            LearnerKind::Bagging => Box::new(OnlineBagging::new(adaptive, self.ensemble_size, seed)),
        })
    }
}

/// One fully specified multi-seed experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: Option<String>,
    /// Dataset manifest; relative paths resolve against the config file.
    pub dataset: PathBuf,
    /// Directory replacing the manifest's data directory.
    #[serde(default)]
    pub data_dir: Option<PathBuf>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_snapshot_every")]
    pub snapshot_every: usize,
    /// Also track metrics over the most recent `window` samples.
    #[serde(default)]
    pub window: Option<usize>,
    /// Truncates every permuted stream.
    #[serde(default)]
    pub max_samples: Option<usize>,
    pub output_dir: PathBuf,
    pub pipeline: PipelineConfig,
    pub learner: LearnerConfig,
}

fn default_seeds() -> Vec<u64> {
    DEFAULT_SEEDS.collect()
}

fn default_snapshot_every() -> usize {
    DEFAULT_SNAPSHOT_EVERY
}

impl ExperimentConfig {
    pub fn new(
        dataset: impl Into<PathBuf>,
        output_dir: impl Into<PathBuf>,
        pipeline: PipelineKind,
        learner: LearnerKind,
    ) -> Self {
        ExperimentConfig {
            name: None,
            dataset: dataset.into(),
            data_dir: None,
            seeds: default_seeds(),
            snapshot_every: DEFAULT_SNAPSHOT_EVERY,
            window: None,
            max_samples: None,
            output_dir: output_dir.into(),
            pipeline: PipelineConfig::of_kind(pipeline),
            learner: LearnerConfig::of_kind(learner),
        }
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config: ExperimentConfig = toml::from_str(&text).map_err(|source| Error::Toml {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        if config.dataset.is_relative() {
            config.dataset = base.join(&config.dataset);
        }
        if let Some(dir) = &mut config.data_dir {
            if dir.is_relative() {
                *dir = base.join(&*dir);
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| {
            let pipeline = serde_json::to_value(self.pipeline.kind).ok();
            let learner = serde_json::to_value(self.learner.kind).ok();
            format!(
                "{}+{}",
                pipeline.as_ref().and_then(|v| v.as_str()).unwrap_or("?"),
                learner.as_ref().and_then(|v| v.as_str()).unwrap_or("?")
            )
        })
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.seeds.is_empty() {
            return fail("seeds must not be empty");
        }
        if self.seeds.iter().collect::<HashSet<_>>().len() != self.seeds.len() {
            return fail("seeds must be distinct");
        }
        if self.snapshot_every == 0 {
            return fail("snapshot_every must be positive");
        }
        if self.window == Some(0) {
            return fail("window must be positive");
        }
        if self.learner.kind == LearnerKind::Bagging && self.learner.ensemble_size == 0 {
            return fail("ensemble_size must be positive");
        }
        if !(self.learner.adwin_delta > 0.0 && self.learner.adwin_delta < 1.0) {
            return fail("learner adwin_delta must lie in (0, 1)");
        }
        self.learner.tree_params().validate()?;
        if let Some(r) = self.pipeline.rebalancer_config() {
            r.validate()?;
        }
        Ok(())
    }

    pub fn build_pipeline(&self, schema: &StreamSchema, seed: u64) -> Result<Box<dyn Pipeline + Send>> {
        let learner = self.learner.build(schema, derive_seed(seed, 1))?;
        Ok(match self.pipeline.rebalancer_config() {
            Some(config) => Box::new(Rebalancer::new(config, schema, learner, derive_seed(seed, 2))?),
            None => Box::new(BarePipeline::new(learner)),
        })
    }
}

/// Independent generator seeds for the permutation (`tag = 0`) and for each
/// randomised component of a run.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    if tag == 0 {
        return seed;
    }
    // SplitMix64 finaliser over the pair.
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
