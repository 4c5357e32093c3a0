//! Small dense networks, the twin model for pairwise AC/PD classification,
//! and an Adam training loop.

mod dense;
mod train;
mod twin;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mmp::AcLabel;

pub use dense::{log_sum_exp, sigmoid, softmax, softplus, Activation, DenseNet, Layer, Terminal, Trace};
pub use train::{
    train_regressor, train_twin, Adam, MlpRegressor, MlpShape, RegressorConfig, TrainConfig, TrainReport, TwinPair,
};
pub use twin::{TwinModel, TwinOutput, TwinShape};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NeuralError {
    #[error("width mismatch: expected {expected}, got {got}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("network has no layers")]
    NoLayers,
    #[error("layer {0} has inconsistent shapes")]
    BadLayer(usize),
    #[error("pd head must be bias-free with arctan hidden layers and a linear output")]
    NotOdd,
    #[error("no training examples")]
    Empty,
    #[error("loss became non-finite in epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
    #[error("invalid training setting: {0}")]
    BadConfig(&'static str),
    #[error("class count for {0} must be positive")]
    ZeroClass(&'static str),
    #[error("feature extraction needs at least 2 layers")]
    TooShallow,
}

/// Loss weights that give each AC class the same total mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassWeights {
    pub ac: f64,
    pub half_ac: f64,
    pub non_ac: f64,
    pub pd: f64,
}

impl ClassWeights {
    pub const UNIT: Self = Self {
        ac: 1.0,
        half_ac: 1.0,
        non_ac: 1.0,
        pd: 1.0,
    };

    pub fn for_label(&self, label: AcLabel) -> f64 {
        match label {
            AcLabel::Ac => self.ac,
            AcLabel::HalfAc => self.half_ac,
            AcLabel::NonAc => self.non_ac,
        }
    }
}

/// `w(AC) = n_non/n_ac`, `w(half) = n_non/n_half`, `w(non) = 1`; the PD
/// weight is the mean AC weight over all pairs, which reduces to
/// `3·n_non/n_mmp`.
pub fn class_weights(n_ac: usize, n_half: usize, n_non: usize) -> Result<ClassWeights, NeuralError> {
    for (n, name) in [(n_ac, "AC"), (n_half, "half-AC"), (n_non, "non-AC")] {
        if n == 0 {
            return Err(NeuralError::ZeroClass(name));
        }
    }
    let non = n_non as f64;
    let ac = non / n_ac as f64;
    let half_ac = non / n_half as f64;
    let n_mmp = (n_ac + n_half + n_non) as f64;
    let pd = (n_ac as f64 * ac + n_half as f64 * half_ac + non) / n_mmp;
    Ok(ClassWeights {
        ac,
        half_ac,
        non_ac: 1.0,
        pd,
    })
}

/// Splits off the final layer: the remaining net (terminal removed) maps
/// inputs to the last hidden representation.
pub fn extract_nfp(net: &DenseNet) -> Result<(DenseNet, Layer), NeuralError> {
    if net.layers.len() < 2 {
        return Err(NeuralError::TooShallow);
    }
    let mut layers = net.layers.clone();
    let last = layers.pop().ok_or(NeuralError::NoLayers)?;
    Ok((DenseNet::new(layers, Terminal::None)?, last))
}
