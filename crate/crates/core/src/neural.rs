//! Minimal dense feedforward network: affine layers with ReLU / identity /
//! softmax activations, mean cross-entropy or mean-squared-error loss,
//! exact backpropagation and Adam.
//!
//! Everything runs in `f64`. Weights are stored `in × out` so a batch is
//! propagated as `A · W + b` with samples on rows.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::Matrix;
use crate::rng;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NeuralError {
    #[error("layer {layer} expects {expected} inputs but previous layer emits {found}")]
    DimensionChainBroken {
        layer: usize,
        expected: usize,
        found: usize,
    },
    #[error("invalid architecture: {0}")]
    InvalidArchitecture(String),
    #[error("input contains non-finite values")]
    NonFiniteInput,
    #[error("loss became non-finite at epoch {0}")]
    NonFiniteLoss(usize),
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("expected {expected} input columns, found {found}")]
    InputWidth { expected: usize, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Identity,
    Softmax,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    CrossEntropy,
    Mse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub weights: Matrix,
    pub biases: Vec<f64>,
    pub activation: Activation,
}

impl Layer {
    pub fn inputs(&self) -> usize {
        self.weights.rows()
    }

    pub fn outputs(&self) -> usize {
        self.weights.cols()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub layers: Vec<Layer>,
    pub loss: Loss,
}

/// Per-layer loss gradients, parallel to `Network::layers`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// L2 penalty on weights (not biases), added as `l2/2·‖W‖²`.
    pub l2: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            batch_size: 32,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            l2: 0.0,
            seed: 0,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<(), NeuralError> {
        let bad = |m: &str| Err(NeuralError::InvalidConfig(m.to_string()));
        if !(self.beta1 > 0.0 && self.beta1 < 1.0 && self.beta2 > 0.0 && self.beta2 < 1.0) {
            return bad("adam betas must lie in (0, 1)");
        }
        if !(self.learning_rate >= 0.0) || !self.learning_rate.is_finite() {
            return bad("learning rate must be finite and non-negative");
        }
        if self.batch_size == 0 {
            return bad("batch size must be positive");
        }
        if self.l2 < 0.0 {
            return bad("l2 must be non-negative");
        }
        Ok(())
    }
}

impl Network {
    /// He-uniform weights, zero biases. `dims` lists layer widths from input
    /// to output; `activations` has one entry per layer (`dims.len() - 1`).
    pub fn init(
        dims: &[usize],
        activations: &[Activation],
        loss: Loss,
        seed: u64,
    ) -> Result<Self, NeuralError> {
        let shapes: Vec<(usize, usize)> = dims.windows(2).map(|w| (w[0], w[1])).collect();
        Self::from_shapes(&shapes, activations, loss, seed)
    }

    /// Like [`Network::init`] but from explicit `(inputs, outputs)` layer
    /// shapes, which must chain.
    pub fn from_shapes(
        shapes: &[(usize, usize)],
        activations: &[Activation],
        loss: Loss,
        seed: u64,
    ) -> Result<Self, NeuralError> {
        if shapes.is_empty() {
            return Err(NeuralError::InvalidArchitecture(
                "at least one layer required".into(),
            ));
        }
        if shapes.len() != activations.len() {
            return Err(NeuralError::InvalidArchitecture(format!(
                "{} layers but {} activations",
                shapes.len(),
                activations.len()
            )));
        }
        for (i, w) in shapes.windows(2).enumerate() {
            if w[0].1 != w[1].0 {
                return Err(NeuralError::DimensionChainBroken {
                    layer: i + 1,
                    expected: w[1].0,
                    found: w[0].1,
                });
            }
        }
        if shapes.iter().any(|&(i, o)| i == 0 || o == 0) {
            return Err(NeuralError::InvalidArchitecture("zero-width layer".into()));
        }
        let last = activations.len() - 1;
        if activations[..last].contains(&Activation::Softmax) {
            return Err(NeuralError::InvalidArchitecture(
                "softmax is only allowed on the output layer".into(),
            ));
        }
        let softmax_out = activations[last] == Activation::Softmax;
        if softmax_out != (loss == Loss::CrossEntropy) {
            return Err(NeuralError::InvalidArchitecture(
                "cross-entropy loss pairs with a softmax output and only with it".into(),
            ));
        }

        let mut r = rng::seeded(seed);
        let layers = shapes
            .iter()
            .zip(activations)
            .map(|(&(fan_in, fan_out), &activation)| {
                let limit = (6.0 / fan_in as f64).sqrt();
                let data = (0..fan_in * fan_out)
                    .map(|_| r.gen_range(-limit..limit))
                    .collect();
                Layer {
                    weights: Matrix::from_vec(fan_in, fan_out, data),
                    biases: vec![0.0; fan_out],
                    activation,
                }
            })
            .collect();
        Ok(Self { layers, loss })
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, Layer::outputs)
    }

    /// Activations of every layer; element 0 is the input itself.
    pub fn forward(&self, x: &Matrix) -> Result<Vec<Matrix>, NeuralError> {
        if x.cols() != self.input_dim() {
            return Err(NeuralError::InputWidth {
                expected: self.input_dim(),
                found: x.cols(),
            });
        }
        if !x.is_finite() {
            return Err(NeuralError::NonFiniteInput);
        }
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.clone());
        for layer in &self.layers {
            let mut z = acts.last().unwrap().matmul(&layer.weights);
            for i in 0..z.rows() {
                let row = z.row_mut(i);
                for (v, b) in row.iter_mut().zip(&layer.biases) {
                    *v += b;
                }
                activate(layer.activation, row);
            }
            acts.push(z);
        }
        Ok(acts)
    }

    pub fn predict(&self, x: &Matrix) -> Result<Matrix, NeuralError> {
        Ok(self.forward(x)?.pop().unwrap())
    }

    /// Mean loss (plus the L2 term when `l2 > 0`).
    pub fn loss(&self, x: &Matrix, targets: &Matrix, l2: f64) -> Result<f64, NeuralError> {
        let out = self.predict(x)?;
        Ok(data_loss(self.loss, &out, targets) + l2_term(self, l2))
    }

    /// Exact gradients of the mean loss given the cached activations from
    /// [`Network::forward`].
    pub fn backward(&self, acts: &[Matrix], targets: &Matrix, l2: f64) -> Gradients {
        let out = acts.last().unwrap();
        assert_eq!(out.rows(), targets.rows(), "target row mismatch");
        assert_eq!(out.cols(), targets.cols(), "target width mismatch");
        let n = out.rows() as f64;

        // dL/dZ at the output layer. Softmax+CE collapses to (p - y)/n;
        // MSE with identity output is 2(o - t)/(n·m).
        let mut delta = out.clone();
        match self.loss {
            Loss::CrossEntropy => {
                for (d, t) in delta.as_mut_slice().iter_mut().zip(targets.as_slice()) {
                    *d = (*d - t) / n;
                }
            }
            Loss::Mse => {
                let scale = 2.0 / (n * out.cols() as f64);
                for (d, t) in delta.as_mut_slice().iter_mut().zip(targets.as_slice()) {
                    *d = (*d - t) * scale;
                }
                if self.layers.last().unwrap().activation == Activation::Relu {
                    relu_mask(&mut delta, out);
                }
            }
        }

        let mut weights = vec![Matrix::zeros(0, 0); self.layers.len()];
        let mut biases = vec![Vec::new(); self.layers.len()];
        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let input = &acts[l];
            let mut dw = input.transpose().matmul(&delta);
            if l2 > 0.0 {
                for (g, w) in dw.as_mut_slice().iter_mut().zip(layer.weights.as_slice()) {
                    *g += l2 * w;
                }
            }
            let mut db = vec![0.0; layer.outputs()];
            for row in delta.iter_rows() {
                for (b, d) in db.iter_mut().zip(row) {
                    *b += d;
                }
            }
            weights[l] = dw;
            biases[l] = db;
            if l > 0 {
                let mut prev = delta.matmul(&layer.weights.transpose());
                match self.layers[l - 1].activation {
                    Activation::Relu => relu_mask(&mut prev, input),
                    Activation::Identity => {}
                    Activation::Softmax => unreachable!("softmax only on output layer"),
                }
                delta = prev;
            }
        }
        Gradients { weights, biases }
    }

    /// Mini-batch Adam. The batch order of epoch `e` is a permutation drawn
    /// from `(cfg.seed, e)` alone. Returns the full-data loss after each
    /// epoch.
    pub fn train(
        &mut self,
        x: &Matrix,
        targets: &Matrix,
        cfg: &TrainConfig,
    ) -> Result<Vec<f64>, NeuralError> {
        cfg.validate()?;
        if x.rows() != targets.rows() {
            return Err(NeuralError::InvalidConfig("row count mismatch".into()));
        }
        if !x.is_finite() || !targets.is_finite() {
            return Err(NeuralError::NonFiniteInput);
        }
        let mut adam = AdamState::new(self);
        let mut trace = Vec::with_capacity(cfg.epochs);
        let mut order: Vec<usize> = (0..x.rows()).collect();
        for epoch in 0..cfg.epochs {
            order.sort_unstable();
            order.shuffle(&mut rng::derived(cfg.seed, epoch as u64));
            for batch in order.chunks(cfg.batch_size) {
                let bx = x.select_rows(batch);
                let bt = targets.select_rows(batch);
                let acts = self.forward(&bx)?;
                let grads = self.backward(&acts, &bt, cfg.l2);
                adam.step(self, &grads, cfg);
            }
            let loss = self.loss(x, targets, cfg.l2)?;
            if !loss.is_finite() {
                return Err(NeuralError::NonFiniteLoss(epoch + 1));
            }
            trace.push(loss);
        }
        Ok(trace)
    }

    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.as_slice().len() + l.biases.len())
            .sum()
    }
}

fn activate(act: Activation, row: &mut [f64]) {
    match act {
        Activation::Relu => {
            for v in row.iter_mut() {
                *v = v.max(0.0);
            }
        }
        Activation::Identity => {}
        Activation::Softmax => softmax_inplace(row),
    }
}

pub fn softmax_inplace(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in row.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in row.iter_mut() {
        *v /= sum;
    }
}

fn relu_mask(delta: &mut Matrix, activated: &Matrix) {
    for (d, a) in delta.as_mut_slice().iter_mut().zip(activated.as_slice()) {
        if *a <= 0.0 {
            *d = 0.0;
        }
    }
}

fn data_loss(loss: Loss, out: &Matrix, targets: &Matrix) -> f64 {
    let n = out.rows() as f64;
    match loss {
        Loss::CrossEntropy => {
            -out.as_slice()
                .iter()
                .zip(targets.as_slice())
                .filter(|(_, &t)| t != 0.0)
                .map(|(&p, &t)| t * p.max(1e-300).ln())
                .sum::<f64>()
                / n
        }
        Loss::Mse => {
            out.as_slice()
                .iter()
                .zip(targets.as_slice())
                .map(|(o, t)| (o - t) * (o - t))
                .sum::<f64>()
                / (n * out.cols() as f64)
        }
    }
}

fn l2_term(net: &Network, l2: f64) -> f64 {
    if l2 == 0.0 {
        return 0.0;
    }
    0.5 * l2
        * net
            .layers
            .iter()
            .flat_map(|l| l.weights.as_slice())
            .map(|w| w * w)
            .sum::<f64>()
}

/// One-hot target matrix for integer labels.
pub fn one_hot(labels: &[usize], classes: usize) -> Matrix {
    let mut m = Matrix::zeros(labels.len(), classes);
    for (i, &l) in labels.iter().enumerate() {
        m.set(i, l, 1.0);
    }
    m
}

struct AdamState {
    m_w: Vec<Vec<f64>>,
    v_w: Vec<Vec<f64>>,
    m_b: Vec<Vec<f64>>,
    v_b: Vec<Vec<f64>>,
    t: i32,
}

impl AdamState {
    fn new(net: &Network) -> Self {
        let w: Vec<Vec<f64>> = net
            .layers
            .iter()
            .map(|l| vec![0.0; l.weights.as_slice().len()])
            .collect();
        let b: Vec<Vec<f64>> = net
            .layers
            .iter()
            .map(|l| vec![0.0; l.biases.len()])
            .collect();
        Self {
            m_w: w.clone(),
            v_w: w,
            m_b: b.clone(),
            v_b: b,
            t: 0,
        }
    }

    fn step(&mut self, net: &mut Network, g: &Gradients, cfg: &TrainConfig) {
        self.t += 1;
        let c1 = 1.0 - cfg.beta1.powi(self.t);
        let c2 = 1.0 - cfg.beta2.powi(self.t);
        let update = |p: &mut [f64], grad: &[f64], m: &mut [f64], v: &mut [f64]| {
            for i in 0..p.len() {
                m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grad[i];
                v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
                let m_hat = m[i] / c1;
                let v_hat = v[i] / c2;
                p[i] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
            }
        };
        for (l, layer) in net.layers.iter_mut().enumerate() {
            update(
                layer.weights.as_mut_slice(),
                g.weights[l].as_slice(),
                &mut self.m_w[l],
                &mut self.v_w[l],
            );
            update(
                &mut layer.biases,
                &g.biases[l],
                &mut self.m_b[l],
                &mut self.v_b[l],
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_is_deterministic() {
        let acts = [Activation::Relu, Activation::Softmax];
        let a = Network::init(&[4, 3, 2], &acts, Loss::CrossEntropy, 5).unwrap();
        let b = Network::init(&[4, 3, 2], &acts, Loss::CrossEntropy, 5).unwrap();
        assert_eq!(a, b);
        assert!(a.layers.iter().all(|l| l.biases.iter().all(|&b| b == 0.0)));
    }

    #[test]
    fn broken_chain() {
        let err = Network::from_shapes(
            &[(4, 3), (5, 2)],
            &[Activation::Relu, Activation::Identity],
            Loss::Mse,
            0,
        )
        .unwrap_err();
        assert_eq!(
            err,
            NeuralError::DimensionChainBroken {
                layer: 1,
                expected: 5,
                found: 3
            }
        );
    }

    #[test]
    fn architecture_rules() {
        assert!(Network::init(&[2, 2], &[Activation::Softmax], Loss::Mse, 0).is_err());
        assert!(Network::init(&[2, 2], &[Activation::Identity], Loss::CrossEntropy, 0).is_err());
        assert!(Network::init(
            &[2, 2, 2],
            &[Activation::Softmax, Activation::Softmax],
            Loss::CrossEntropy,
            0
        )
        .is_err());
    }

    #[test]
    fn zero_input_through_relu() {
        let net = Network::init(
            &[3, 4, 2],
            &[Activation::Relu, Activation::Identity],
            Loss::Mse,
            1,
        )
        .unwrap();
        let out = net.predict(&Matrix::zeros(2, 3)).unwrap();
        assert!(out.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn identity_network() {
        let net = Network {
            layers: vec![Layer {
                weights: Matrix::identity(3),
                biases: vec![0.0; 3],
                activation: Activation::Identity,
            }],
            loss: Loss::Mse,
        };
        let x = Matrix::from_rows(&[[1.0, -2.0, 3.5]]);
        assert_eq!(net.predict(&x).unwrap(), x);
    }

    #[test]
    fn softmax_equal_logits() {
        let mut row = [2.0, 2.0, 2.0];
        softmax_inplace(&mut row);
        for v in row {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn non_finite_input_rejected() {
        let net = Network::init(&[2, 1], &[Activation::Identity], Loss::Mse, 0).unwrap();
        let x = Matrix::from_rows(&[[f64::NAN, 1.0]]);
        assert_eq!(net.forward(&x), Err(NeuralError::NonFiniteInput));
    }

    #[test]
    fn invalid_train_config() {
        let mut net = Network::init(&[2, 1], &[Activation::Identity], Loss::Mse, 0).unwrap();
        let x = Matrix::zeros(2, 2);
        let t = Matrix::zeros(2, 1);
        let cfg = TrainConfig {
            beta1: 1.0,
            ..Default::default()
        };
        assert!(matches!(
            net.train(&x, &t, &cfg),
            Err(NeuralError::InvalidConfig(_))
        ));
    }
}
