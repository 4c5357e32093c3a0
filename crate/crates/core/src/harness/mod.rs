//! Experiment orchestration and the stage commands behind the CLI.

mod config;
mod experiment;
pub mod io;
mod stages;

use std::path::Path;

use thiserror::Error;

pub use config::{ExperimentConfig, ModelConfig, PoolingConfig, SplitConfig};
pub use experiment::{
    evaluate_plan, fit_plan, init_threads, plan_seed, prepare, prepare_rows, run_experiment, run_prepared, set_metrics,
    summarize, with_thread_cap, ClassScores, ModelArtifact, PairPrediction, PlanResult, Prepared, ResultsFile,
    SetMetrics, Summary, TrainedModel,
};
pub use stages::{
    cmd_evaluate, cmd_experiment, cmd_fingerprint, cmd_mmp, cmd_parse, cmd_pool_fit, cmd_pool_transform, cmd_split,
    cmd_synth, cmd_train, read_fingerprints, CleanedCompound, CleanedFile, FingerprintRow, MmpRow, PooledRow,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: line {line}: {message}")]
    Csv { path: String, line: usize, message: String },
    #[error("{path}: missing required column '{column}'")]
    MissingColumn { path: String, column: String },
    #[error("{path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Pool(#[from] crate::pooling::PoolError),
    #[error(transparent)]
    Neural(#[from] crate::neural::NeuralError),
    #[error(transparent)]
    Predict(#[from] crate::predictors::PredictError),
    #[error(transparent)]
    Metric(#[from] crate::metrics::MetricError),
}

impl HarnessError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub(crate) fn csv(path: &Path, line: usize, message: String) -> Self {
        Self::Csv {
            path: path.display().to_string(),
            line,
            message,
        }
    }

    pub(crate) fn json(path: &Path, source: serde_json::Error) -> Self {
        Self::Json {
            path: path.display().to_string(),
            source,
        }
    }
}
