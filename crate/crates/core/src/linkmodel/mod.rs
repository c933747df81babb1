//! Two-stage feed-forward link classifier.

mod cascade;
mod codec;
mod mlp;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cascade::{
    disambiguate, run_cascade, train_cascade, AcceptedLink, CascadeConfig, CascadeConfusion, CascadeModel,
    CascadeOutput, CascadeTrainingReport, LinkedSample, ScoredCandidate, StageSummary,
};
pub use mlp::{sigmoid, train_mlp, Activation, Dense, Gradient, MlpModel, Standardizer, TrainConfig, TrainingMeta};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("feature row has {found} values, model expects {expected}")]
    LayoutMismatch { expected: usize, found: usize },
    #[error("insufficient data for {what}: need {required}, have {available}")]
    InsufficientData {
        what: String,
        required: usize,
        available: usize,
    },
    #[error("training loss became non-finite at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
    #[error("training features contain non-finite values")]
    NonFiniteInput,
    #[error("model family {0:?} is not implemented")]
    Unsupported(ModelFamily),
    #[error("model file: {0}")]
    Format(String),
}

/// Classifier families compared for linkage. Only the feed-forward network is built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelFamily {
    NeuralNetwork,
    GradientBoostedTrees,
    RandomForest,
    WideAndDeep,
}

/// Trains a single-stage classifier of the given family.
pub fn train_family(
    family: ModelFamily,
    layout: Vec<String>,
    rows: &[Vec<f64>],
    labels: &[bool],
    config: &TrainConfig,
    seed: u64,
) -> Result<MlpModel, ModelError> {
    match family {
        ModelFamily::NeuralNetwork => train_mlp(layout, rows, labels, config, seed),
        other => Err(ModelError::Unsupported(other)),
    }
}
