//! Twin model: a shared featuriser feeding a symmetric AC head (on the
//! componentwise max of the two embeddings) and an odd PD head (on their
//! difference).

use serde::{Deserialize, Serialize};

use super::dense::{log_sum_exp, sigmoid, softmax, softplus, Activation, DenseNet, Terminal};
use super::{ClassWeights, NeuralError};
use crate::mmp::{AcLabel, PdLabel};
use crate::rng;

/// Hidden widths of the three sub-networks. The featuriser's last entry is
/// the embedding width.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwinShape {
    pub input: usize,
    pub featurizer: Vec<usize>,
    pub ac_hidden: Vec<usize>,
    pub pd_hidden: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwinModel {
    pub featurizer: DenseNet,
    pub ac_head: DenseNet,
    pub pd_head: DenseNet,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwinOutput {
    pub ac_probs: [f64; 3],
    pub pd_prob: f64,
}

impl TwinOutput {
    /// Most probable AC class; ties resolve towards AC.
    pub fn ac_label(&self) -> AcLabel {
        let mut best = 0;
        for c in 1..3 {
            if self.ac_probs[c] > self.ac_probs[best] {
                best = c;
            }
        }
        AcLabel::from_index(best)
    }

    /// `Left` iff the first compound is predicted more active.
    pub fn pd_label(&self) -> PdLabel {
        if self.pd_prob > 0.5 {
            PdLabel::Left
        } else {
            PdLabel::Right
        }
    }
}

/// Keeps probabilities strictly inside (0, 1) when exp underflows.
fn open_unit(p: f64) -> f64 {
    p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

struct Pass {
    t_i: super::Trace,
    t_j: super::Trace,
    ac: super::Trace,
    pd: super::Trace,
}

impl TwinModel {
    pub fn new(featurizer: DenseNet, ac_head: DenseNet, pd_head: DenseNet) -> Result<Self, NeuralError> {
        let emb = featurizer.output_dim();
        for head in [&ac_head, &pd_head] {
            if head.input_dim() != emb {
                return Err(NeuralError::WidthMismatch {
                    expected: emb,
                    got: head.input_dim(),
                });
            }
        }
        if ac_head.terminal != Terminal::Softmax3 {
            return Err(NeuralError::WidthMismatch {
                expected: 3,
                got: ac_head.output_dim(),
            });
        }
        if pd_head.terminal != Terminal::Sigmoid || !pd_head.is_odd() {
            return Err(NeuralError::NotOdd);
        }
        Ok(Self {
            featurizer,
            ac_head,
            pd_head,
        })
    }

    /// Glorot-initialised model: ReLU featuriser with biases, ReLU AC head
    /// ending in a linear 3-way layer, odd arctan PD head.
    pub fn init(shape: &TwinShape, seed: u64) -> Result<Self, NeuralError> {
        if shape.featurizer.is_empty() {
            return Err(NeuralError::NoLayers);
        }
        let mut r = rng::seeded(seed);
        let mut sizes = vec![shape.input];
        sizes.extend(&shape.featurizer);
        let featurizer = DenseNet::glorot(&sizes, Activation::Relu, Activation::Relu, true, Terminal::None, &mut r)?;
        let emb = *shape.featurizer.last().unwrap_or(&shape.input);
        let mut ac = vec![emb];
        ac.extend(&shape.ac_hidden);
        ac.push(3);
        let ac_head = DenseNet::glorot(
            &ac,
            Activation::Relu,
            Activation::Identity,
            true,
            Terminal::Softmax3,
            &mut r,
        )?;
        let mut pd = vec![emb];
        pd.extend(&shape.pd_hidden);
        pd.push(1);
        let pd_head = DenseNet::glorot(
            &pd,
            Activation::Arctan,
            Activation::Identity,
            false,
            Terminal::Sigmoid,
            &mut r,
        )?;
        Self::new(featurizer, ac_head, pd_head)
    }

    pub fn input_dim(&self) -> usize {
        self.featurizer.input_dim()
    }

    fn check(&self, x_i: &[f64], x_j: &[f64]) -> Result<(), NeuralError> {
        self.featurizer.check_input(x_i)?;
        self.featurizer.check_input(x_j)
    }

    /// Logits of both heads: (AC logits, PD logit).
    fn logits(&self, x_i: &[f64], x_j: &[f64]) -> ([f64; 3], f64) {
        let e_i = self.featurizer.logits(x_i);
        let e_j = self.featurizer.logits(x_j);
        let m: Vec<f64> = e_i.iter().zip(&e_j).map(|(a, b)| a.max(*b)).collect();
        let d: Vec<f64> = e_i.iter().zip(&e_j).map(|(a, b)| a - b).collect();
        let z = self.ac_head.logits(&m);
        ([z[0], z[1], z[2]], self.pd_head.logits(&d)[0])
    }

    pub fn forward(&self, x_i: &[f64], x_j: &[f64]) -> Result<TwinOutput, NeuralError> {
        self.check(x_i, x_j)?;
        let (z, s) = self.logits(x_i, x_j);
        let p = softmax(&z);
        Ok(TwinOutput {
            ac_probs: [open_unit(p[0]), open_unit(p[1]), open_unit(p[2])],
            pd_prob: open_unit(sigmoid(s)),
        })
    }

    /// Output of the PD head before the sigmoid, on an arbitrary embedding
    /// difference.
    pub fn pd_trunk(&self, v: &[f64]) -> f64 {
        self.pd_head.logits(v)[0]
    }

    /// Weighted cross-entropy plus weighted binary cross-entropy, evaluated
    /// from logits.
    pub fn loss(
        &self,
        x_i: &[f64],
        x_j: &[f64],
        ac: AcLabel,
        pd: PdLabel,
        w: &ClassWeights,
    ) -> Result<f64, NeuralError> {
        self.check(x_i, x_j)?;
        let (z, s) = self.logits(x_i, x_j);
        Ok(loss_from_logits(&z, s, ac, pd, w))
    }

    pub fn param_count(&self) -> usize {
        self.featurizer.param_count() + self.ac_head.param_count() + self.pd_head.param_count()
    }

    /// Featuriser, AC head, PD head parameters concatenated.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        self.featurizer.write_params(&mut out);
        self.ac_head.write_params(&mut out);
        self.pd_head.write_params(&mut out);
        out
    }

    pub fn set_params(&mut self, src: &[f64]) {
        let mut k = self.featurizer.read_params(src);
        k += self.ac_head.read_params(&src[k..]);
        self.pd_head.read_params(&src[k..]);
    }

    fn pass(&self, x_i: &[f64], x_j: &[f64]) -> (Pass, Vec<f64>, Vec<f64>) {
        let t_i = self.featurizer.trace(x_i);
        let t_j = self.featurizer.trace(x_j);
        let m: Vec<f64> = t_i.output.iter().zip(&t_j.output).map(|(a, b)| a.max(*b)).collect();
        let d: Vec<f64> = t_i.output.iter().zip(&t_j.output).map(|(a, b)| a - b).collect();
        let ac = self.ac_head.trace(&m);
        let pd = self.pd_head.trace(&d);
        (Pass { t_i, t_j, ac, pd }, m, d)
    }

    /// Adds `∂ℒ/∂θ` for one pair into `grads` (layout of [`params`](Self::params))
    /// and returns the loss.
    pub fn accumulate_gradient(
        &self,
        x_i: &[f64],
        x_j: &[f64],
        ac: AcLabel,
        pd: PdLabel,
        w: &ClassWeights,
        grads: &mut [f64],
    ) -> f64 {
        let (p, _, _) = self.pass(x_i, x_j);
        let z = [p.ac.output[0], p.ac.output[1], p.ac.output[2]];
        let s = p.pd.output[0];
        let loss = loss_from_logits(&z, s, ac, pd, w);

        let w_ac = w.for_label(ac);
        let probs = softmax(&z);
        let target = ac.index();
        let g_z: Vec<f64> = (0..3)
            .map(|c| w_ac * (probs[c] - if c == target { 1.0 } else { 0.0 }))
            .collect();
        let g_s = [w.pd * (sigmoid(s) - pd.as_f64())];

        let nf = self.featurizer.param_count();
        let na = self.ac_head.param_count();
        let (g_feat, rest) = grads.split_at_mut(nf);
        let (g_ac, g_pd) = rest.split_at_mut(na);
        let g_m = self.ac_head.backward(&p.ac, &g_z, g_ac, true).unwrap_or_default();
        let g_d = self.pd_head.backward(&p.pd, &g_s, g_pd, true).unwrap_or_default();

        // max routes its gradient to the first argument on ties
        let (e_i, e_j) = (&p.t_i.output, &p.t_j.output);
        let mut g_i = g_d.clone();
        let mut g_j: Vec<f64> = g_d.iter().map(|v| -v).collect();
        for k in 0..g_m.len() {
            if e_i[k] >= e_j[k] {
                g_i[k] += g_m[k];
            } else {
                g_j[k] += g_m[k];
            }
        }
        self.featurizer.backward(&p.t_i, &g_i, g_feat, false);
        self.featurizer.backward(&p.t_j, &g_j, g_feat, false);
        loss
    }
}

fn loss_from_logits(z: &[f64; 3], s: f64, ac: AcLabel, pd: PdLabel, w: &ClassWeights) -> f64 {
    let ce = log_sum_exp(z) - z[ac.index()];
    // −ln sig(s) = softplus(−s), −ln(1 − sig(s)) = softplus(s)
    let bce = match pd {
        PdLabel::Left => softplus(-s),
        PdLabel::Right => softplus(s),
    };
    w.for_label(ac) * ce + w.pd * bce
}
