//! Experiment configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::ecfp::EnumerationConfig;
use crate::mmp::ActivityUnits;
use crate::neural::{TrainConfig, TwinShape};
use crate::pooling::PoolMethod;
use crate::predictors::{AcThresholds, Weighting};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoolingConfig {
    pub method: PoolMethod,
    pub dim: usize,
}

impl Default for PoolingConfig {
    fn default() -> Self {
        Self {
            method: PoolMethod::SortSlice,
            dim: 1024,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub k: usize,
    pub seeds: Vec<u64>,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            k: 2,
            seeds: vec![0, 1, 2],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelConfig {
    Knn {
        #[serde(default = "default_k")]
        k: usize,
        #[serde(default = "default_p")]
        minkowski_p: f64,
        #[serde(default)]
        weighting: Weighting,
    },
    Mlp {
        #[serde(default = "default_mlp_hidden")]
        hidden: Vec<usize>,
        #[serde(default)]
        train: TrainConfig,
    },
    Twin {
        #[serde(default = "default_featurizer")]
        featurizer: Vec<usize>,
        #[serde(default = "default_head")]
        ac_hidden: Vec<usize>,
        #[serde(default = "default_head")]
        pd_hidden: Vec<usize>,
        #[serde(default)]
        train: TrainConfig,
    },
}

fn default_k() -> usize {
    5
}
fn default_p() -> f64 {
    2.0
}
fn default_mlp_hidden() -> Vec<usize> {
    vec![128, 64]
}
fn default_featurizer() -> Vec<usize> {
    vec![64, 32]
}
fn default_head() -> Vec<usize> {
    vec![32]
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig::Knn {
            k: default_k(),
            minkowski_p: default_p(),
            weighting: Weighting::Uniform,
        }
    }
}

impl ModelConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ModelConfig::Knn { .. } => "knn",
            ModelConfig::Mlp { .. } => "mlp",
            ModelConfig::Twin { .. } => "twin",
        }
    }

    pub fn twin_shape(&self, input: usize) -> Option<TwinShape> {
        match self {
            ModelConfig::Twin {
                featurizer,
                ac_hidden,
                pd_hidden,
                ..
            } => Some(TwinShape {
                input,
                featurizer: featurizer.clone(),
                ac_hidden: ac_hidden.clone(),
                pd_hidden: pd_hidden.clone(),
            }),
            _ => None,
        }
    }
}

/// Everything one experiment needs. Relative paths are resolved against the
/// directory of the config file by [`ExperimentConfig::load`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: PathBuf,
    #[serde(default)]
    pub units: ActivityUnits,
    #[serde(default)]
    pub ecfp: EnumerationConfig,
    #[serde(default)]
    pub pooling: PoolingConfig,
    #[serde(default)]
    pub split: SplitConfig,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub thresholds: AcThresholds,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(dataset: impl Into<PathBuf>) -> Self {
        Self {
            dataset: dataset.into(),
            units: ActivityUnits::default(),
            ecfp: EnumerationConfig::default(),
            pooling: PoolingConfig::default(),
            split: SplitConfig::default(),
            model: ModelConfig::default(),
            thresholds: AcThresholds::default(),
            output: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let mut cfg: Self = super::io::read_json(path)?;
        let base = path.parent().unwrap_or(Path::new(""));
        if cfg.dataset.is_relative() {
            cfg.dataset = base.join(&cfg.dataset);
        }
        if let Some(out) = cfg.output.as_mut().filter(|o| o.is_relative()) {
            *out = base.join(&*out);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.pooling.dim == 0 {
            return bad("pooling.dim must be at least 1".into());
        }
        if self.split.k < 2 {
            return bad(format!("split.k must be at least 2, got {}", self.split.k));
        }
        if self.split.seeds.is_empty() {
            return bad("split.seeds must not be empty".into());
        }
        self.ecfp.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        self.thresholds
            .validate()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        match &self.model {
            ModelConfig::Knn { k, minkowski_p, .. } => {
                if *k == 0 || !(*minkowski_p >= 1.0) {
                    return bad("knn needs k >= 1 and minkowski_p >= 1".into());
                }
            }
            ModelConfig::Mlp { hidden, train } => {
                if hidden.contains(&0) {
                    return bad("mlp hidden widths must be positive".into());
                }
                train.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
            }
            ModelConfig::Twin {
                featurizer,
                ac_hidden,
                pd_hidden,
                train,
            } => {
                if featurizer.is_empty() || featurizer.iter().chain(ac_hidden).chain(pd_hidden).any(|&w| w == 0) {
                    return bad("twin widths must be positive and the featuriser non-empty".into());
                }
                train.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg: ExperimentConfig = serde_json::from_str(r#"{"dataset":"d.csv"}"#).unwrap();
        assert_eq!(cfg, ExperimentConfig::new("d.csv"));
        cfg.validate().unwrap();
    }

    #[test]
    fn full_config_parses() {
        let text = r#"{
            "dataset": "data/sar.csv",
            "units": "raw",
            "ecfp": {"radius": 1, "invariants": "pharmacophoric"},
            "pooling": {"method": "mim", "dim": 64},
            "split": {"k": 3, "seeds": [4]},
            "model": {"type": "twin", "featurizer": [8], "train": {"epochs": 2}},
            "thresholds": {"d_crit": 1.5, "lower": 1.0, "upper": 2.0},
            "output": "out.json"
        }"#;
        let cfg: ExperimentConfig = serde_json::from_str(text).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.model.name(), "twin");
        let back: ExperimentConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(
            serde_json::from_str::<ExperimentConfig>(r#"{"dataset":"d","pooling":{"method":"sum","dim":4}}"#).is_err()
        );
        let mut cfg = ExperimentConfig::new("d.csv");
        cfg.pooling.dim = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::new("d.csv");
        cfg.split.k = 1;
        assert!(cfg.validate().is_err());
    }
}
