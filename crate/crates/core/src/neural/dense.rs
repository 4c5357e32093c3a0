//! Fully connected networks with an explicit reverse pass.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::NeuralError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Arctan,
    Identity,
}

impl Activation {
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Arctan => z.atan(),
            Activation::Identity => z,
        }
    }

    pub fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Arctan => 1.0 / (1.0 + z * z),
            Activation::Identity => 1.0,
        }
    }
}

/// Output transform applied after the last layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Terminal {
    None,
    Softmax3,
    Sigmoid,
}

/// Affine map followed by an activation. Weights are row-major with one row
/// per output unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub rows: usize,
    pub cols: usize,
    pub weights: Vec<f64>,
    pub bias: Option<Vec<f64>>,
    pub activation: Activation,
}

impl Layer {
    /// Glorot-uniform weights, zero bias.
    pub fn glorot(cols: usize, rows: usize, bias: bool, activation: Activation, rng: &mut crate::rng::Rng) -> Self {
        let bound = (6.0 / (cols + rows) as f64).sqrt();
        let weights = (0..rows * cols).map(|_| rng.random_range(-bound..bound)).collect();
        Self {
            rows,
            cols,
            weights,
            bias: bias.then(|| vec![0.0; rows]),
            activation,
        }
    }

    pub fn param_count(&self) -> usize {
        self.weights.len() + self.bias.as_ref().map_or(0, Vec::len)
    }

    pub fn pre_activation(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                let row = &self.weights[r * self.cols..(r + 1) * self.cols];
                let dot: f64 = row.iter().zip(x).map(|(w, v)| w * v).sum();
                dot + self.bias.as_ref().map_or(0.0, |b| b[r])
            })
            .collect()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let act = self.activation;
        self.pre_activation(x).into_iter().map(|z| act.apply(z)).collect()
    }
}

/// Intermediate values of one forward pass.
#[derive(Debug, Clone)]
pub struct Trace {
    inputs: Vec<Vec<f64>>,
    pre: Vec<Vec<f64>>,
    pub output: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseNet {
    pub layers: Vec<Layer>,
    pub terminal: Terminal,
}

impl DenseNet {
    pub fn new(layers: Vec<Layer>, terminal: Terminal) -> Result<Self, NeuralError> {
        if layers.is_empty() {
            return Err(NeuralError::NoLayers);
        }
        for (k, layer) in layers.iter().enumerate() {
            if layer.weights.len() != layer.rows * layer.cols
                || layer.bias.as_ref().is_some_and(|b| b.len() != layer.rows)
            {
                return Err(NeuralError::BadLayer(k));
            }
            if k > 0 && layers[k - 1].rows != layer.cols {
                return Err(NeuralError::WidthMismatch {
                    expected: layers[k - 1].rows,
                    got: layer.cols,
                });
            }
        }
        let out = layers.last().map_or(0, |l| l.rows);
        let need = match terminal {
            Terminal::Softmax3 => Some(3),
            Terminal::Sigmoid => Some(1),
            Terminal::None => None,
        };
        if let Some(w) = need.filter(|&w| w != out) {
            return Err(NeuralError::WidthMismatch { expected: w, got: out });
        }
        Ok(Self { layers, terminal })
    }

    /// Glorot-initialised net with layer widths `sizes` (input first).
    pub fn glorot(
        sizes: &[usize],
        hidden: Activation,
        last: Activation,
        bias: bool,
        terminal: Terminal,
        rng: &mut crate::rng::Rng,
    ) -> Result<Self, NeuralError> {
        if sizes.len() < 2 {
            return Err(NeuralError::NoLayers);
        }
        let n = sizes.len() - 1;
        let layers = (0..n)
            .map(|k| {
                let act = if k + 1 == n { last } else { hidden };
                Layer::glorot(sizes[k], sizes[k + 1], bias, act, rng)
            })
            .collect();
        Self::new(layers, terminal)
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].cols
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.rows)
    }

    /// Bias-free, arctan hidden layers and a linear last layer.
    pub fn is_odd(&self) -> bool {
        let last = self.layers.len() - 1;
        self.layers.iter().enumerate().all(|(k, l)| {
            l.bias.is_none()
                && if k == last {
                    l.activation == Activation::Identity
                } else {
                    l.activation == Activation::Arctan
                }
        })
    }

    /// Output of the last layer, before the terminal transform.
    pub fn logits(&self, x: &[f64]) -> Vec<f64> {
        let mut a = x.to_vec();
        for layer in &self.layers {
            a = layer.apply(&a);
        }
        a
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let z = self.logits(x);
        match self.terminal {
            Terminal::None => z,
            Terminal::Softmax3 => softmax(&z),
            Terminal::Sigmoid => z.iter().map(|&v| sigmoid(v)).collect(),
        }
    }

    pub fn check_input(&self, x: &[f64]) -> Result<(), NeuralError> {
        if x.len() != self.input_dim() {
            return Err(NeuralError::WidthMismatch {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn trace(&self, x: &[f64]) -> Trace {
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut a = x.to_vec();
        for layer in &self.layers {
            let z = layer.pre_activation(&a);
            let next = z.iter().map(|&v| layer.activation.apply(v)).collect();
            inputs.push(a);
            pre.push(z);
            a = next;
        }
        Trace { inputs, pre, output: a }
    }

    /// Accumulates `∂L/∂θ` into `grads` (flat layout, see [`params`](Self::params))
    /// given `∂L/∂output` of the last layer (pre-terminal). Returns `∂L/∂x`
    /// when `input_grad` is set.
    pub fn backward(&self, trace: &Trace, grad_out: &[f64], grads: &mut [f64], input_grad: bool) -> Option<Vec<f64>> {
        debug_assert_eq!(grads.len(), self.param_count());
        let mut offsets = Vec::with_capacity(self.layers.len());
        let mut off = 0;
        for layer in &self.layers {
            offsets.push(off);
            off += layer.param_count();
        }
        let mut g = grad_out.to_vec();
        for k in (0..self.layers.len()).rev() {
            let layer = &self.layers[k];
            let x = &trace.inputs[k];
            let gz: Vec<f64> = g
                .iter()
                .zip(&trace.pre[k])
                .map(|(ga, &z)| ga * layer.activation.derivative(z))
                .collect();
            let base = offsets[k];
            for r in 0..layer.rows {
                if gz[r] == 0.0 {
                    continue;
                }
                let row = &mut grads[base + r * layer.cols..base + (r + 1) * layer.cols];
                for (gw, &xv) in row.iter_mut().zip(x) {
                    *gw += gz[r] * xv;
                }
            }
            if layer.bias.is_some() {
                let bbase = base + layer.weights.len();
                for r in 0..layer.rows {
                    grads[bbase + r] += gz[r];
                }
            }
            if k == 0 && !input_grad {
                return None;
            }
            let mut gx = vec![0.0; layer.cols];
            for r in 0..layer.rows {
                if gz[r] == 0.0 {
                    continue;
                }
                let row = &layer.weights[r * layer.cols..(r + 1) * layer.cols];
                for (gxc, &w) in gx.iter_mut().zip(row) {
                    *gxc += gz[r] * w;
                }
            }
            g = gx;
        }
        Some(g)
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Layer::param_count).sum()
    }

    /// Parameters layer by layer: weights (row-major), then bias.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        self.write_params(&mut out);
        out
    }

    pub fn write_params(&self, out: &mut Vec<f64>) {
        for layer in &self.layers {
            out.extend_from_slice(&layer.weights);
            if let Some(b) = &layer.bias {
                out.extend_from_slice(b);
            }
        }
    }

    /// Loads parameters from the front of `src`; returns how many were used.
    pub fn read_params(&mut self, src: &[f64]) -> usize {
        let mut k = 0;
        for layer in &mut self.layers {
            let n = layer.weights.len();
            layer.weights.copy_from_slice(&src[k..k + n]);
            k += n;
            if let Some(b) = &mut layer.bias {
                let m = b.len();
                b.copy_from_slice(&src[k..k + m]);
                k += m;
            }
        }
        k
    }
}

/// Softmax with max-shift for stability.
pub fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|&v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// `ln Σ exp(z)`.
pub fn log_sum_exp(z: &[f64]) -> f64 {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + z.iter().map(|&v| (v - m).exp()).sum::<f64>().ln()
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + eˣ)` without overflow.
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}
