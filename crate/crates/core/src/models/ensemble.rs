//! Bagged tree ensembles: random forest and extremely randomized trees.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{fit_classifier, MaxFeatures, Splitter, Tree, TreeParams};
use crate::matrix::Matrix;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub bootstrap: bool,
    pub tree: TreeParams,
}

impl ForestParams {
    pub fn random_forest() -> Self {
        Self {
            n_trees: 100,
            bootstrap: true,
            tree: TreeParams {
                max_features: MaxFeatures::Sqrt,
                splitter: Splitter::Best,
                ..Default::default()
            },
        }
    }

    pub fn extra_trees() -> Self {
        Self {
            n_trees: 100,
            bootstrap: false,
            tree: TreeParams {
                max_features: MaxFeatures::Sqrt,
                splitter: Splitter::Random,
                ..Default::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Tree>,
    pub n_classes: usize,
}

impl Forest {
    /// Tree `t` draws from the stream derived from `(seed, t)`, so the
    /// result does not depend on thread scheduling.
    pub fn fit(
        x: &Matrix,
        labels: &[usize],
        n_classes: usize,
        params: &ForestParams,
        seed: u64,
    ) -> Self {
        let n = x.rows();
        let trees = (0..params.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut r = rng::derived(seed, t as u64);
                let mut weights = vec![0.0; n];
                if params.bootstrap {
                    for _ in 0..n {
                        weights[r.gen_range(0..n)] += 1.0;
                    }
                } else {
                    weights.fill(1.0);
                }
                fit_classifier(x, labels, n_classes, &weights, &params.tree, &mut r)
            })
            .collect();
        Self { trees, n_classes }
    }

    /// Fraction of trees voting for each class.
    pub fn predict_proba(&self, x: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(x.rows(), self.n_classes);
        let n = self.trees.len() as f64;
        for i in 0..x.rows() {
            let row = x.row(i);
            let mut votes = vec![0usize; self.n_classes];
            for tree in &self.trees {
                votes[argmax(tree.leaf_value(row))] += 1;
            }
            for (c, v) in votes.into_iter().enumerate() {
                out.set(i, c, v as f64 / n);
            }
        }
        out
    }

    /// Mean of the per-tree normalized impurity-decrease importances.
    pub fn feature_importances(&self) -> Vec<f64> {
        let d = self.trees.first().map_or(0, |t| t.n_features);
        let mut acc = vec![0.0; d];
        for t in &self.trees {
            for (a, v) in acc.iter_mut().zip(t.feature_importances()) {
                *a += v;
            }
        }
        super::tree::normalize(&acc)
    }
}

/// Index of the largest value; ties resolve to the lowest index.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}
