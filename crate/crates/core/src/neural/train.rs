//! Mini-batch Adam training for the twin model and the MLP regressor.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::dense::{Activation, DenseNet, Terminal};
use super::twin::TwinModel;
use super::{ClassWeights, NeuralError};
use crate::mmp::{AcLabel, PdLabel};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            batch_size: 32,
            epochs: 50,
            seed: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), NeuralError> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(NeuralError::BadConfig("learning_rate must be positive"));
        }
        if self.batch_size == 0 {
            return Err(NeuralError::BadConfig("batch_size must be positive"));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(NeuralError::BadConfig("betas must lie in [0, 1)"));
        }
        if self.epsilon <= 0.0 {
            return Err(NeuralError::BadConfig("epsilon must be positive"));
        }
        Ok(())
    }
}

pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(n: usize, cfg: &TrainConfig) -> Self {
        Self {
            lr: cfg.learning_rate,
            beta1: cfg.beta1,
            beta2: cfg.beta2,
            eps: cfg.epsilon,
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        for k in 0..params.len() {
            let g = grads[k];
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * g;
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[k] / c1;
            let v_hat = self.v[k] / c2;
            params[k] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

/// Mean training loss per epoch.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub loss_trace: Vec<f64>,
}

/// A labelled pair of rows in a feature matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TwinPair {
    pub i: usize,
    pub j: usize,
    pub ac: AcLabel,
    pub pd: PdLabel,
}

/// Generic epoch loop: `batch_grad` adds the batch's summed gradient into
/// the buffer and returns the summed loss.
fn run_epochs(
    params: &mut Vec<f64>,
    n: usize,
    cfg: &TrainConfig,
    mut batch_grad: impl FnMut(&[f64], &[usize], &mut [f64]) -> f64,
) -> Result<TrainReport, NeuralError> {
    cfg.validate()?;
    if n == 0 {
        return Err(NeuralError::Empty);
    }
    let mut adam = Adam::new(params.len(), cfg);
    let mut r = rng::seeded(cfg.seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut grads = vec![0.0; params.len()];
    let mut report = TrainReport::default();
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut r);
        let mut total = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            grads.iter_mut().for_each(|g| *g = 0.0);
            let loss = batch_grad(params, batch, &mut grads);
            if !loss.is_finite() || grads.iter().any(|g| !g.is_finite()) {
                return Err(NeuralError::NonFiniteLoss { epoch });
            }
            total += loss;
            let scale = 1.0 / batch.len() as f64;
            grads.iter_mut().for_each(|g| *g *= scale);
            adam.step(params, &grads);
        }
        report.loss_trace.push(total / n as f64);
    }
    Ok(report)
}

/// Trains `model` in place on pairs of rows of `features`.
pub fn train_twin(
    model: &mut TwinModel,
    features: &[Vec<f64>],
    pairs: &[TwinPair],
    weights: &ClassWeights,
    cfg: &TrainConfig,
) -> Result<TrainReport, NeuralError> {
    for p in pairs {
        for &row in [p.i, p.j].iter() {
            let x = features.get(row).ok_or(NeuralError::WidthMismatch {
                expected: features.len(),
                got: row,
            })?;
            model.featurizer.check_input(x)?;
        }
    }
    let mut params = model.params();
    let mut scratch = model.clone();
    let report = run_epochs(&mut params, pairs.len(), cfg, |theta, batch, grads| {
        scratch.set_params(theta);
        batch
            .iter()
            .map(|&b| {
                let p = &pairs[b];
                scratch.accumulate_gradient(&features[p.i], &features[p.j], p.ac, p.pd, weights, grads)
            })
            .sum()
    });
    model.set_params(&params);
    report
}

/// Hidden widths of a regression MLP.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpShape {
    pub input: usize,
    pub hidden: Vec<usize>,
}

pub type RegressorConfig = TrainConfig;

/// ReLU MLP with a linear scalar output, trained on centred targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpRegressor {
    pub net: DenseNet,
    pub offset: f64,
}

impl MlpRegressor {
    pub fn init(shape: &MlpShape, seed: u64) -> Result<Self, NeuralError> {
        let mut sizes = vec![shape.input];
        sizes.extend(&shape.hidden);
        sizes.push(1);
        let net = DenseNet::glorot(
            &sizes,
            Activation::Relu,
            Activation::Identity,
            true,
            Terminal::None,
            &mut rng::seeded(seed),
        )?;
        Ok(Self { net, offset: 0.0 })
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64, NeuralError> {
        self.net.check_input(x)?;
        Ok(self.net.forward(x)[0] + self.offset)
    }
}

/// Minimises mean squared error; sets the offset to the target mean first.
pub fn train_regressor(
    model: &mut MlpRegressor,
    xs: &[Vec<f64>],
    ys: &[f64],
    cfg: &TrainConfig,
) -> Result<TrainReport, NeuralError> {
    if xs.len() != ys.len() {
        return Err(NeuralError::WidthMismatch {
            expected: xs.len(),
            got: ys.len(),
        });
    }
    for x in xs {
        model.net.check_input(x)?;
    }
    if ys.is_empty() {
        return Err(NeuralError::Empty);
    }
    model.offset = ys.iter().sum::<f64>() / ys.len() as f64;
    let offset = model.offset;
    let mut params = model.net.params();
    let mut scratch = model.net.clone();
    let report = run_epochs(&mut params, xs.len(), cfg, |theta, batch, grads| {
        scratch.read_params(theta);
        batch
            .iter()
            .map(|&b| {
                let t = scratch.trace(&xs[b]);
                let resid = t.output[0] - (ys[b] - offset);
                scratch.backward(&t, &[2.0 * resid], grads, false);
                resid * resid
            })
            .sum()
    });
    model.net.read_params(&params);
    report
}
