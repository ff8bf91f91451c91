//! Multi-layer perceptron classifier on top of [`crate::neural`].

use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;
use crate::neural::{one_hot, Activation, Loss, Network, NeuralError, TrainConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub l2: f64,
}

impl Default for MlpParams {
    fn default() -> Self {
        Self {
            hidden: vec![64, 32],
            epochs: 300,
            learning_rate: 1e-3,
            batch_size: 32,
            l2: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub network: Network,
    pub loss_trace: Vec<f64>,
}

impl Mlp {
    pub fn fit(
        x: &Matrix,
        labels: &[usize],
        n_classes: usize,
        params: &MlpParams,
        seed: u64,
    ) -> Result<Self, NeuralError> {
        let mut dims = vec![x.cols()];
        dims.extend_from_slice(&params.hidden);
        dims.push(n_classes);
        let mut acts = vec![Activation::Relu; params.hidden.len()];
        acts.push(Activation::Softmax);
        let mut network = Network::init(&dims, &acts, Loss::CrossEntropy, seed)?;
        let cfg = TrainConfig {
            epochs: params.epochs,
            batch_size: params.batch_size,
            learning_rate: params.learning_rate,
            l2: params.l2,
            seed,
            ..Default::default()
        };
        let loss_trace = network.train(x, &one_hot(labels, n_classes), &cfg)?;
        Ok(Self {
            network,
            loss_trace,
        })
    }

    pub fn predict_proba(&self, x: &Matrix) -> Result<Matrix, NeuralError> {
        self.network.predict(x)
    }
}
