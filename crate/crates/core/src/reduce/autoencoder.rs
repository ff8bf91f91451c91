//! Symmetric autoencoder whose bottleneck becomes the feature table.

use serde::{Deserialize, Serialize};

use super::ReduceError;
use crate::matrix::Matrix;
use crate::neural::{Activation, Loss, Network, TrainConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutoencoderConfig {
    pub latent_dim: usize,
    /// Encoder widths; `None` means one layer of `max(8, ⌈d/2⌉)`.
    pub hidden_dims: Option<Vec<usize>>,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for AutoencoderConfig {
    fn default() -> Self {
        Self {
            latent_dim: 8,
            hidden_dims: None,
            epochs: 200,
            learning_rate: 1e-3,
            batch_size: 32,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Autoencoder {
    pub network: Network,
    /// Number of leading layers that form the encoder.
    pub encoder_layers: usize,
    pub loss_trace: Vec<f64>,
}

impl Autoencoder {
    pub fn latent_dim(&self) -> usize {
        self.network.layers[self.encoder_layers - 1].outputs()
    }

    /// Reconstruction of `x` through the full network.
    pub fn reconstruct(&self, x: &Matrix) -> Result<Matrix, ReduceError> {
        Ok(self.network.predict(x)?)
    }

    pub fn encode(&self, x: &Matrix) -> Result<Matrix, ReduceError> {
        let encoder = Network {
            layers: self.network.layers[..self.encoder_layers].to_vec(),
            loss: Loss::Mse,
        };
        Ok(encoder.predict(x)?)
    }
}

/// Layers: ReLU encoder, linear bottleneck, mirrored ReLU decoder and a
/// linear output, trained on mean-squared reconstruction error.
pub fn ae_fit(x: &Matrix, cfg: &AutoencoderConfig) -> Result<Autoencoder, ReduceError> {
    let d = x.cols();
    if cfg.epochs == 0 {
        return Err(ReduceError::InvalidConfig(
            "epochs must be at least 1".into(),
        ));
    }
    if cfg.latent_dim == 0 || cfg.latent_dim >= d {
        return Err(ReduceError::InvalidConfig(format!(
            "latent_dim {} must lie in [1, {d})",
            cfg.latent_dim
        )));
    }
    let hidden = cfg
        .hidden_dims
        .clone()
        .unwrap_or_else(|| vec![8.max(d.div_ceil(2))]);
    if hidden.contains(&0) {
        return Err(ReduceError::InvalidConfig(
            "hidden widths must be positive".into(),
        ));
    }
    let mut dims = vec![d];
    dims.extend(&hidden);
    dims.push(cfg.latent_dim);
    dims.extend(hidden.iter().rev());
    dims.push(d);
    let mut acts = vec![Activation::Relu; hidden.len()];
    acts.push(Activation::Identity);
    acts.extend(vec![Activation::Relu; hidden.len()]);
    acts.push(Activation::Identity);
    let mut network = Network::init(&dims, &acts, Loss::Mse, cfg.seed)?;
    let train = TrainConfig {
        epochs: cfg.epochs,
        batch_size: cfg.batch_size,
        learning_rate: cfg.learning_rate,
        seed: cfg.seed,
        ..Default::default()
    };
    let loss_trace = network.train(x, x, &train)?;
    Ok(Autoencoder {
        network,
        encoder_layers: hidden.len() + 1,
        loss_trace,
    })
}
