//! Feed-forward binary classifier trained by mini-batch gradient descent
//! with momentum on binary cross-entropy.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::codec::{Reader, Writer, KIND_MLP, MAGIC};
use super::ModelError;
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Tanh,
    Sigmoid,
    Identity,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
            Activation::Sigmoid => sigmoid(z),
            Activation::Identity => z,
        }
    }

    /// Derivative expressed through the pre-activation `z` and output `a`.
    fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - a * a,
            Activation::Sigmoid => a * (1.0 - a),
            Activation::Identity => 1.0,
        }
    }

    fn code(self) -> u8 {
        match self {
            Activation::Relu => 0,
            Activation::Tanh => 1,
            Activation::Sigmoid => 2,
            Activation::Identity => 3,
        }
    }

    fn from_code(c: u8) -> Result<Self, ModelError> {
        Ok(match c {
            0 => Activation::Relu,
            1 => Activation::Tanh,
            2 => Activation::Sigmoid,
            3 => Activation::Identity,
            _ => return Err(ModelError::Format(format!("unknown activation code {c}"))),
        })
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Binary cross-entropy of a logit, computed without overflow.
fn bce_from_logit(z: f64, y: f64) -> f64 {
    z.max(0.0) - y * z + (-z.abs()).exp().ln_1p()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    /// Row-major `outputs x inputs`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl Dense {
    fn zeros(inputs: usize, outputs: usize, activation: Activation) -> Self {
        Dense {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
            activation,
        }
    }

    fn init(inputs: usize, outputs: usize, activation: Activation, rng: &mut ChaCha8Rng) -> Self {
        // He-uniform for rectifiers, Glorot-uniform otherwise.
        let limit = match activation {
            Activation::Relu => (6.0 / inputs as f64).sqrt(),
            _ => (6.0 / (inputs + outputs) as f64).sqrt(),
        };
        let mut d = Dense::zeros(inputs, outputs, activation);
        for w in &mut d.weights {
            *w = rng.random_range(-limit..limit);
        }
        d
    }

    fn pre_activation(&self, x: &[f64], z: &mut [f64]) {
        for (o, zo) in z.iter_mut().enumerate() {
            let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
            *zo = self.bias[o] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
        }
    }
}

/// Per-feature affine standardisation fitted on training rows.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    /// Reciprocal standard deviation (1 for constant columns).
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn identity(n: usize) -> Self {
        Standardizer {
            mean: vec![0.0; n],
            scale: vec![1.0; n],
        }
    }

    pub fn fit(rows: &[&[f64]]) -> Self {
        let n = rows.first().map_or(0, |r| r.len());
        let count = rows.len().max(1) as f64;
        let mut mean = vec![0.0; n];
        for r in rows {
            for (m, x) in mean.iter_mut().zip(r.iter()) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= count);
        let mut var = vec![0.0; n];
        for r in rows {
            for ((v, x), m) in var.iter_mut().zip(r.iter()).zip(&mean) {
                *v += (x - m) * (x - m);
            }
        }
        let scale = var
            .into_iter()
            .map(|v| {
                let sd = (v / count).sqrt();
                if sd > 1e-12 {
                    1.0 / sd
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { mean, scale }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((x, m), s)| (x - m) * s)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainingMeta {
    pub epochs: usize,
    pub best_epoch: usize,
    pub final_learning_rate: f64,
    pub holdout_accuracy: f64,
    pub train_loss: Vec<f64>,
    pub holdout_loss: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub max_epochs: usize,
    pub holdout_fraction: f64,
    /// Epochs without holdout improvement before the step size is halved.
    pub plateau_patience: usize,
    /// Epochs without holdout improvement before training stops.
    pub early_stop_patience: usize,
    pub min_delta: f64,
    pub weight_decay: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            hidden: vec![256, 64],
            activation: Activation::Relu,
            batch_size: 256,
            learning_rate: 1e-3,
            momentum: 0.9,
            max_epochs: 50,
            holdout_fraction: 0.2,
            plateau_patience: 2,
            early_stop_patience: 6,
            min_delta: 1e-4,
            weight_decay: 0.0,
        }
    }
}

impl TrainConfig {
    pub fn stage2_default() -> Self {
        TrainConfig {
            hidden: vec![32, 16],
            ..Default::default()
        }
    }
}

/// Trained network plus the feature layout it expects.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub layout: Vec<String>,
    pub scaler: Standardizer,
    pub layers: Vec<Dense>,
    pub seed: u64,
    pub meta: TrainingMeta,
}

/// Gradients in the same flat order as [`MlpModel::params`].
pub type Gradient = Vec<f64>;

impl MlpModel {
    /// Randomly initialised network: `hidden` layers with `activation`,
    /// then a single logistic output unit.
    pub fn new(layout: Vec<String>, hidden: &[usize], activation: Activation, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers = Vec::with_capacity(hidden.len() + 1);
        let mut width = layout.len();
        for &h in hidden {
            layers.push(Dense::init(width, h, activation, &mut rng));
            width = h;
        }
        layers.push(Dense::init(width, 1, Activation::Sigmoid, &mut rng));
        MlpModel {
            scaler: Standardizer::identity(layout.len()),
            layout,
            layers,
            seed,
            meta: TrainingMeta::default(),
        }
    }

    /// All-zero weights; predicts exactly 0.5 for any input.
    pub fn zeros(layout: Vec<String>, hidden: &[usize]) -> Self {
        let mut m = MlpModel::new(layout, hidden, Activation::Relu, 0);
        for l in &mut m.layers {
            l.weights.iter_mut().for_each(|w| *w = 0.0);
        }
        m
    }

    pub fn input_len(&self) -> usize {
        self.layout.len()
    }

    pub fn check_layout(&self, names: &[String]) -> Result<(), ModelError> {
        if names != self.layout.as_slice() {
            return Err(ModelError::LayoutMismatch {
                expected: self.layout.len(),
                found: names.len(),
            });
        }
        Ok(())
    }

    fn check_row(&self, row: &[f64]) -> Result<(), ModelError> {
        if row.len() != self.input_len() {
            return Err(ModelError::LayoutMismatch {
                expected: self.input_len(),
                found: row.len(),
            });
        }
        Ok(())
    }

    /// Output logit for an already standardised input.
    fn logit(&self, x: &[f64]) -> f64 {
        let mut a = x.to_vec();
        let last = self.layers.len() - 1;
        for (i, l) in self.layers.iter().enumerate() {
            let mut z = vec![0.0; l.outputs];
            l.pre_activation(&a, &mut z);
            if i == last {
                return z[0];
            }
            a = z.into_iter().map(|z| l.activation.apply(z)).collect();
        }
        unreachable!("network has an output layer")
    }

    /// Match probability for one full feature row.
    pub fn predict(&self, row: &[f64]) -> Result<f64, ModelError> {
        self.check_row(row)?;
        Ok(sigmoid(self.logit(&self.scaler.apply(row))))
    }

    pub fn predict_batch(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>, ModelError> {
        par::try_map(rows, |r| self.predict(r))
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// Weights and biases, layer by layer.
    pub fn params(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            p.extend_from_slice(&l.weights);
            p.extend_from_slice(&l.bias);
        }
        p
    }

    pub fn set_params(&mut self, p: &[f64]) {
        assert_eq!(p.len(), self.param_count(), "parameter vector length");
        let mut off = 0;
        for l in &mut self.layers {
            let nw = l.weights.len();
            l.weights.copy_from_slice(&p[off..off + nw]);
            off += nw;
            let nb = l.bias.len();
            l.bias.copy_from_slice(&p[off..off + nb]);
            off += nb;
        }
    }

    /// Mean binary cross-entropy over the rows and its analytic gradient.
    ///
    /// Inputs are raw rows; the fitted standardiser is applied first and is
    /// not itself a trainable parameter.
    pub fn loss_and_gradient(&self, rows: &[&[f64]], labels: &[f64]) -> (f64, Gradient) {
        let mut grad = vec![0.0; self.param_count()];
        let mut loss = 0.0;
        let n = rows.len().max(1) as f64;
        for (row, &y) in rows.iter().zip(labels) {
            loss += self.accumulate(&self.scaler.apply(row), y, &mut grad);
        }
        grad.iter_mut().for_each(|g| *g /= n);
        (loss / n, grad)
    }

    pub fn loss(&self, rows: &[&[f64]], labels: &[f64]) -> f64 {
        let n = rows.len().max(1) as f64;
        rows.iter()
            .zip(labels)
            .map(|(r, &y)| bce_from_logit(self.logit(&self.scaler.apply(r)), y))
            .sum::<f64>()
            / n
    }

    /// Backpropagates one example, adding its gradient into `grad`; returns its loss.
    fn accumulate(&self, x: &[f64], y: f64, grad: &mut [f64]) -> f64 {
        let nl = self.layers.len();
        // activations[i] is the input to layer i
        let mut activations: Vec<Vec<f64>> = Vec::with_capacity(nl + 1);
        let mut pre: Vec<Vec<f64>> = Vec::with_capacity(nl);
        activations.push(x.to_vec());
        for l in &self.layers {
            let mut z = vec![0.0; l.outputs];
            l.pre_activation(activations.last().unwrap(), &mut z);
            let a = z.iter().map(|&z| l.activation.apply(z)).collect();
            pre.push(z);
            activations.push(a);
        }
        let logit = pre[nl - 1][0];
        let loss = bce_from_logit(logit, y);

        // offsets of each layer's block in the flat gradient
        let mut offsets = Vec::with_capacity(nl);
        let mut off = 0;
        for l in &self.layers {
            offsets.push(off);
            off += l.weights.len() + l.bias.len();
        }

        // dL/dz for the logistic output with cross-entropy
        let mut delta = vec![sigmoid(logit) - y];
        for li in (0..nl).rev() {
            let l = &self.layers[li];
            let input = &activations[li];
            let base = offsets[li];
            for o in 0..l.outputs {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                let row = &mut grad[base + o * l.inputs..base + (o + 1) * l.inputs];
                for (g, a) in row.iter_mut().zip(input) {
                    *g += d * a;
                }
                grad[base + l.weights.len() + o] += d;
            }
            if li == 0 {
                break;
            }
            let prev = &self.layers[li - 1];
            let mut next = vec![0.0; l.inputs];
            for (o, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                let row = &l.weights[o * l.inputs..(o + 1) * l.inputs];
                for (n, w) in next.iter_mut().zip(row) {
                    *n += d * w;
                }
            }
            for (j, n) in next.iter_mut().enumerate() {
                *n *= prev.activation.derivative(pre[li - 1][j], activations[li][j]);
            }
            delta = next;
        }
        loss
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::default();
        w.buf.extend_from_slice(MAGIC);
        w.u8(KIND_MLP);
        self.encode(&mut w);
        w.buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ModelError> {
        let mut r = Reader::new(bytes);
        r.header(KIND_MLP)?;
        let m = Self::decode(&mut r)?;
        r.finish()?;
        Ok(m)
    }

    pub(crate) fn encode(&self, w: &mut Writer) {
        w.u64(self.seed);
        w.strs(&self.layout);
        w.f64s(&self.scaler.mean);
        w.f64s(&self.scaler.scale);
        w.u32(self.layers.len() as u32);
        for l in &self.layers {
            w.u32(l.inputs as u32);
            w.u32(l.outputs as u32);
            w.u8(l.activation.code());
            for &x in &l.weights {
                w.f64(x);
            }
            for &x in &l.bias {
                w.f64(x);
            }
        }
        w.u32(self.meta.epochs as u32);
        w.u32(self.meta.best_epoch as u32);
        w.f64(self.meta.final_learning_rate);
        w.f64(self.meta.holdout_accuracy);
        w.f64s(&self.meta.train_loss);
        w.f64s(&self.meta.holdout_loss);
    }

    pub(crate) fn decode(r: &mut Reader<'_>) -> Result<Self, ModelError> {
        let seed = r.u64()?;
        let layout = r.strs()?;
        let mean = r.f64s()?;
        let scale = r.f64s()?;
        let nlayers = r.u32()? as usize;
        let mut layers = Vec::with_capacity(nlayers);
        let mut width = layout.len();
        for _ in 0..nlayers {
            let inputs = r.u32()? as usize;
            let outputs = r.u32()? as usize;
            let activation = Activation::from_code(r.u8()?)?;
            if inputs != width {
                return Err(ModelError::Format(format!(
                    "layer expects {inputs} inputs, previous width {width}"
                )));
            }
            let weights = r.f64s_exact(inputs * outputs)?;
            let bias = r.f64s_exact(outputs)?;
            layers.push(Dense {
                inputs,
                outputs,
                weights,
                bias,
                activation,
            });
            width = outputs;
        }
        if width != 1 || layers.is_empty() || mean.len() != layout.len() || scale.len() != layout.len() {
            return Err(ModelError::Format("inconsistent network dimensions".into()));
        }
        let meta = TrainingMeta {
            epochs: r.u32()? as usize,
            best_epoch: r.u32()? as usize,
            final_learning_rate: r.f64()?,
            holdout_accuracy: r.f64()?,
            train_loss: r.f64s()?,
            holdout_loss: r.f64s()?,
        };
        Ok(MlpModel {
            layout,
            scaler: Standardizer { mean, scale },
            layers,
            seed,
            meta,
        })
    }
}

/// Trains a fresh network on `rows`/`labels`.
///
/// A seeded shuffle splits off `holdout_fraction` of the rows. Training runs
/// mini-batch gradient descent with momentum, halves the step size when the
/// holdout loss plateaus, stops early when it stops improving, and returns
/// the parameters from the best holdout epoch. Fully deterministic for a
/// given seed.
pub fn train_mlp(
    layout: Vec<String>,
    rows: &[Vec<f64>],
    labels: &[bool],
    config: &TrainConfig,
    seed: u64,
) -> Result<MlpModel, ModelError> {
    if rows.len() != labels.len() {
        return Err(ModelError::LayoutMismatch {
            expected: rows.len(),
            found: labels.len(),
        });
    }
    let positives = labels.iter().filter(|&&l| l).count();
    let negatives = labels.len() - positives;
    if positives < 2 || negatives < 2 {
        return Err(ModelError::InsufficientData {
            what: "training rows of each class".into(),
            required: 2,
            available: positives.min(negatives),
        });
    }
    if let Some(r) = rows.iter().find(|r| r.len() != layout.len()) {
        return Err(ModelError::LayoutMismatch {
            expected: layout.len(),
            found: r.len(),
        });
    }
    if rows.iter().flatten().any(|x| !x.is_finite()) {
        return Err(ModelError::NonFiniteInput);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.shuffle(&mut rng);
    let n_hold = if config.holdout_fraction > 0.0 {
        ((rows.len() as f64 * config.holdout_fraction).round() as usize).clamp(1, rows.len() - 1)
    } else {
        0
    };
    let (hold_idx, train_idx) = order.split_at(n_hold);
    let train_idx = train_idx.to_vec();

    let train_rows: Vec<&[f64]> = train_idx.iter().map(|&i| rows[i].as_slice()).collect();
    let y = |i: usize| if labels[i] { 1.0 } else { 0.0 };
    let hold_rows: Vec<&[f64]> = hold_idx.iter().map(|&i| rows[i].as_slice()).collect();
    let hold_y: Vec<f64> = hold_idx.iter().map(|&i| y(i)).collect();
    let train_y_all: Vec<f64> = train_idx.iter().map(|&i| y(i)).collect();

    let mut model = MlpModel::new(layout, &config.hidden, config.activation, rng.random());
    model.seed = seed;
    model.scaler = Standardizer::fit(&train_rows);

    let mut velocity = vec![0.0; model.param_count()];
    let mut lr = config.learning_rate;
    let mut best = (f64::INFINITY, model.params(), 0usize);
    let mut since_best = 0usize;
    let mut since_halving = 0usize;
    let mut meta = TrainingMeta::default();
    let mut epoch_order = train_idx.clone();
    let batch = config.batch_size.max(1);

    for epoch in 0..config.max_epochs {
        epoch_order.shuffle(&mut rng);
        for chunk in epoch_order.chunks(batch) {
            let b_rows: Vec<&[f64]> = chunk.iter().map(|&i| rows[i].as_slice()).collect();
            let b_y: Vec<f64> = chunk.iter().map(|&i| y(i)).collect();
            let (_, grad) = model.loss_and_gradient(&b_rows, &b_y);
            let mut params = model.params();
            for ((p, v), g) in params.iter_mut().zip(velocity.iter_mut()).zip(&grad) {
                *v = config.momentum * *v - lr * (g + config.weight_decay * *p);
                *p += *v;
            }
            model.set_params(&params);
        }
        let train_loss = model.loss(&train_rows, &train_y_all);
        let hold_loss = if n_hold > 0 {
            model.loss(&hold_rows, &hold_y)
        } else {
            train_loss
        };
        if !train_loss.is_finite() || !hold_loss.is_finite() {
            return Err(ModelError::NonFiniteLoss { epoch });
        }
        meta.train_loss.push(train_loss);
        meta.holdout_loss.push(hold_loss);
        meta.epochs = epoch + 1;

        if hold_loss < best.0 - config.min_delta {
            best = (hold_loss, model.params(), epoch);
            since_best = 0;
            since_halving = 0;
        } else {
            since_best += 1;
            since_halving += 1;
            if since_best >= config.early_stop_patience {
                break;
            }
            if since_halving >= config.plateau_patience {
                lr /= 2.0;
                since_halving = 0;
            }
        }
    }

    model.set_params(&best.1);
    meta.best_epoch = best.2;
    meta.final_learning_rate = lr;
    let eval_rows = if n_hold > 0 { &hold_rows } else { &train_rows };
    let eval_y = if n_hold > 0 { &hold_y } else { &train_y_all };
    let correct = eval_rows
        .iter()
        .zip(eval_y.iter())
        .filter(|(r, &yy)| (sigmoid(model.logit(&model.scaler.apply(r))) >= 0.5) == (yy == 1.0))
        .count();
    meta.holdout_accuracy = correct as f64 / eval_rows.len().max(1) as f64;
    model.meta = meta;
    Ok(model)
}
