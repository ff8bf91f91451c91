//! Gradient boosting on the multinomial deviance and SAMME AdaBoost.

use serde::{Deserialize, Serialize};

use super::ensemble::argmax;
use super::tree::{fit_classifier, fit_regressor, normalize, LeafRule, Tree, TreeParams};
use crate::matrix::Matrix;
use crate::neural::softmax_inplace;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GboostParams {
    pub n_stages: usize,
    pub learning_rate: f64,
    pub tree: TreeParams,
}

impl Default for GboostParams {
    fn default() -> Self {
        Self {
            n_stages: 200,
            learning_rate: 0.1,
            tree: TreeParams {
                max_depth: Some(3),
                ..Default::default()
            },
        }
    }
}

/// Stagewise additive model: one regression tree per class per stage on
/// the softmax residuals, scaled by the learning rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientBoosting {
    pub init: Vec<f64>,
    pub stages: Vec<Vec<Tree>>,
    pub learning_rate: f64,
    pub n_classes: usize,
}

impl GradientBoosting {
    pub fn fit(
        x: &Matrix,
        labels: &[usize],
        n_classes: usize,
        params: &GboostParams,
        seed: u64,
    ) -> Self {
        let n = x.rows();
        let mut prior = vec![0.0; n_classes];
        for &l in labels {
            prior[l] += 1.0 / n as f64;
        }
        // Log-priors; absent classes get a large negative score.
        let init: Vec<f64> = prior.iter().map(|p| p.max(1e-12).ln()).collect();
        let mut scores = Matrix::from_vec(
            n,
            n_classes,
            (0..n).flat_map(|_| init.iter().copied()).collect(),
        );
        let weights = vec![1.0; n];
        let mut stages = Vec::with_capacity(params.n_stages);
        let mut r = rng::seeded(seed);
        for _ in 0..params.n_stages {
            let mut probs = scores.clone();
            for i in 0..n {
                softmax_inplace(probs.row_mut(i));
            }
            let mut stage = Vec::with_capacity(n_classes);
            for k in 0..n_classes {
                let residual: Vec<f64> = (0..n)
                    .map(|i| f64::from(u8::from(labels[i] == k)) - probs.get(i, k))
                    .collect();
                let tree = fit_regressor(
                    x,
                    &residual,
                    LeafRule::MultinomialNewton { n_classes },
                    &weights,
                    &params.tree,
                    &mut r,
                );
                for i in 0..n {
                    let step = params.learning_rate * tree.leaf_value(x.row(i))[0];
                    scores.set(i, k, scores.get(i, k) + step);
                }
                stage.push(tree);
            }
            stages.push(stage);
        }
        Self {
            init,
            stages,
            learning_rate: params.learning_rate,
            n_classes,
        }
    }

    pub fn decision_function(&self, x: &Matrix) -> Matrix {
        let mut scores = Matrix::zeros(x.rows(), self.n_classes);
        for i in 0..x.rows() {
            let row = x.row(i);
            let out = scores.row_mut(i);
            out.copy_from_slice(&self.init);
            for stage in &self.stages {
                for (k, tree) in stage.iter().enumerate() {
                    out[k] += self.learning_rate * tree.leaf_value(row)[0];
                }
            }
        }
        scores
    }

    pub fn predict_proba(&self, x: &Matrix) -> Matrix {
        let mut p = self.decision_function(x);
        for i in 0..p.rows() {
            softmax_inplace(p.row_mut(i));
        }
        p
    }

    pub fn feature_importances(&self) -> Vec<f64> {
        let d = self
            .stages
            .first()
            .and_then(|s| s.first())
            .map_or(0, |t| t.n_features);
        let mut acc = vec![0.0; d];
        for tree in self.stages.iter().flatten() {
            for (a, v) in acc.iter_mut().zip(&tree.impurity_decrease) {
                *a += v;
            }
        }
        normalize(&acc)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaboostParams {
    pub n_estimators: usize,
    pub learning_rate: f64,
    pub tree: TreeParams,
}

impl Default for AdaboostParams {
    fn default() -> Self {
        Self {
            n_estimators: 100,
            learning_rate: 1.0,
            tree: TreeParams {
                max_depth: Some(1),
                ..Default::default()
            },
        }
    }
}

/// Per-round record of a SAMME fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostRound {
    pub weighted_error: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoost {
    pub learners: Vec<Tree>,
    pub alphas: Vec<f64>,
    pub trace: Vec<BoostRound>,
    pub n_classes: usize,
}

impl AdaBoost {
    /// SAMME. A weak learner is kept only if its weighted error is below
    /// 0.5; otherwise boosting halts (the first learner is always kept so
    /// the model can predict). A perfect learner ends boosting.
    pub fn fit(
        x: &Matrix,
        labels: &[usize],
        n_classes: usize,
        params: &AdaboostParams,
        seed: u64,
    ) -> Self {
        let n = x.rows();
        let mut w = vec![1.0 / n as f64; n];
        let mut r = rng::seeded(seed);
        let mut model = Self {
            learners: Vec::new(),
            alphas: Vec::new(),
            trace: Vec::new(),
            n_classes,
        };
        let k = n_classes as f64;
        for _ in 0..params.n_estimators {
            let tree = fit_classifier(x, labels, n_classes, &w, &params.tree, &mut r);
            let miss: Vec<bool> = (0..n)
                .map(|i| argmax(tree.leaf_value(x.row(i))) != labels[i])
                .collect();
            let total: f64 = w.iter().sum();
            let err: f64 = w
                .iter()
                .zip(&miss)
                .filter(|(_, &m)| m)
                .map(|(w, _)| w)
                .sum::<f64>()
                / total;
            if err <= 0.0 {
                model.learners.push(tree);
                model.alphas.push(1.0);
                model.trace.push(BoostRound {
                    weighted_error: 0.0,
                    alpha: 1.0,
                });
                break;
            }
            if err >= 0.5 {
                if model.learners.is_empty() {
                    model.learners.push(tree);
                    model.alphas.push(1.0);
                    model.trace.push(BoostRound {
                        weighted_error: err,
                        alpha: 1.0,
                    });
                }
                break;
            }
            let alpha = params.learning_rate * (((1.0 - err) / err).ln() + (k - 1.0).ln());
            for (wi, &m) in w.iter_mut().zip(&miss) {
                if m {
                    *wi *= alpha.exp();
                }
            }
            let s: f64 = w.iter().sum();
            w.iter_mut().for_each(|v| *v /= s);
            model.learners.push(tree);
            model.alphas.push(alpha);
            model.trace.push(BoostRound {
                weighted_error: err,
                alpha,
            });
        }
        model
    }

    /// Alpha-weighted class votes normalized to sum 1.
    pub fn predict_proba(&self, x: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(x.rows(), self.n_classes);
        let total: f64 = self.alphas.iter().sum();
        for i in 0..x.rows() {
            let row = x.row(i);
            for (tree, &a) in self.learners.iter().zip(&self.alphas) {
                let c = argmax(tree.leaf_value(row));
                out.set(i, c, out.get(i, c) + a / total);
            }
        }
        out
    }

    pub fn feature_importances(&self) -> Vec<f64> {
        let d = self.learners.first().map_or(0, |t| t.n_features);
        let mut acc = vec![0.0; d];
        for (tree, &a) in self.learners.iter().zip(&self.alphas) {
            for (v, imp) in acc.iter_mut().zip(tree.feature_importances()) {
                *v += a * imp;
            }
        }
        normalize(&acc)
    }
}
