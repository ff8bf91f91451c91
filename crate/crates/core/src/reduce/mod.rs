//! Dimensionality reduction: supervised LDA and an unsupervised autoencoder.

pub mod autoencoder;
pub mod lda;

use thiserror::Error;

use crate::neural::NeuralError;

pub use autoencoder::{ae_fit, Autoencoder, AutoencoderConfig};
pub use lda::{fisher_criterion, lda_fit, LdaProjection};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReduceError {
    #[error("within-class scatter is singular or between-class scatter vanishes")]
    SingularScatter,
    #[error("expected {expected} columns, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{m} components requested with {classes} classes in {dims} dimensions")]
    InvalidComponents {
        m: usize,
        classes: usize,
        dims: usize,
    },
    #[error("class {0} has a single row")]
    ClassTooSmall(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Neural(#[from] NeuralError),
}
