//! Tabular machine-learning toolkit for sleep-disorder screening experiments.
//!
//! The crate covers the whole experiment path: CSV ingestion and feature
//! engineering ([`dataset`]), scalers and SMOTE/Tomek resampling
//! ([`transform`]), mutual-information and Boruta selection
//! ([`feature_select`]), LDA and autoencoder reduction ([`reduce`]), a small
//! backprop engine ([`neural`]), eight classifier families ([`models`]),
//! metrics/cross-validation/Wilcoxon ([`eval`]) and pipeline composition with
//! the canonical experiment grids ([`pipeline`]).

pub mod dataset;
pub mod eval;
pub mod feature_select;
pub mod matrix;
pub mod models;
pub mod neural;
pub mod pipeline;
pub mod reduce;
pub mod rng;
pub mod transform;

pub use matrix::Matrix;
