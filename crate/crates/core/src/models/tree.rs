//! CART trees: weighted-Gini classification trees and squared-error
//! regression trees, with either exhaustive midpoint search or one random
//! threshold per candidate feature (Extra Trees).

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;
use crate::rng::Rng as SeededRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Splitter {
    /// Midpoints between consecutive distinct sorted values.
    Best,
    /// One uniform threshold in `[min, max)` per candidate feature.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    All,
    Sqrt,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, n_features: usize) -> usize {
        let k = match self {
            Self::All => n_features,
            Self::Sqrt => (n_features as f64).sqrt().floor() as usize,
            Self::Count(k) => k,
        };
        k.clamp(1, n_features.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub max_features: MaxFeatures,
    pub splitter: Splitter,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: None,
            min_samples_split: 2,
            min_samples_leaf: 1,
            max_features: MaxFeatures::All,
            splitter: Splitter::Best,
        }
    }
}

/// Arena node. Leaves carry the class distribution (classification) or a
/// single value (regression).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Leaf {
        value: Vec<f64>,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
    pub n_features: usize,
    /// Unnormalized weighted impurity decrease per feature.
    pub impurity_decrease: Vec<f64>,
}

impl Tree {
    pub fn leaf_value(&self, row: &[f64]) -> &[f64] {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                TreeNode::Leaf { value } => return value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], at: usize) -> usize {
            match &nodes[at] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => {
                    1 + walk(nodes, *left).max(walk(nodes, *right))
                }
            }
        }
        walk(&self.nodes, 0)
    }

    /// Importances normalized to sum 1 (all zeros for a single-leaf tree).
    pub fn feature_importances(&self) -> Vec<f64> {
        normalize(&self.impurity_decrease)
    }
}

pub(crate) fn normalize(v: &[f64]) -> Vec<f64> {
    let total: f64 = v.iter().sum();
    if total > 0.0 {
        v.iter().map(|x| x / total).collect()
    } else {
        vec![0.0; v.len()]
    }
}

/// Split criterion over node statistics.
trait Criterion {
    type Stats: Clone;
    fn empty(&self) -> Self::Stats;
    fn add(&self, s: &mut Self::Stats, i: usize, w: f64);
    fn remove(&self, s: &mut Self::Stats, i: usize, w: f64);
    fn impurity(&self, s: &Self::Stats) -> f64;
    fn leaf(&self, idx: &[usize], w: &[f64]) -> Vec<f64>;
}

struct Gini<'a> {
    labels: &'a [usize],
    n_classes: usize,
}

impl Criterion for Gini<'_> {
    type Stats = (Vec<f64>, f64);

    fn empty(&self) -> Self::Stats {
        (vec![0.0; self.n_classes], 0.0)
    }

    fn add(&self, s: &mut Self::Stats, i: usize, w: f64) {
        s.0[self.labels[i]] += w;
        s.1 += w;
    }

    fn remove(&self, s: &mut Self::Stats, i: usize, w: f64) {
        s.0[self.labels[i]] -= w;
        s.1 -= w;
    }

    fn impurity(&self, s: &Self::Stats) -> f64 {
        if s.1 <= 0.0 {
            return 0.0;
        }
        1.0 - s.0.iter().map(|c| (c / s.1) * (c / s.1)).sum::<f64>()
    }

    fn leaf(&self, idx: &[usize], w: &[f64]) -> Vec<f64> {
        let mut s = self.empty();
        for &i in idx {
            self.add(&mut s, i, w[i]);
        }
        s.0.iter().map(|c| c / s.1).collect()
    }
}

/// How a regression leaf turns its targets into a value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LeafRule {
    Mean,
    /// One Newton step for the multinomial deviance on residuals
    /// `r = y - p`: `(K-1)/K · Σr / Σ|r|(1-|r|)`.
    MultinomialNewton {
        n_classes: usize,
    },
}

struct SquaredError<'a> {
    y: &'a [f64],
    rule: LeafRule,
}

impl Criterion for SquaredError<'_> {
    /// (Σw, Σwy, Σwy²)
    type Stats = [f64; 3];

    fn empty(&self) -> Self::Stats {
        [0.0; 3]
    }

    fn add(&self, s: &mut Self::Stats, i: usize, w: f64) {
        let y = self.y[i];
        s[0] += w;
        s[1] += w * y;
        s[2] += w * y * y;
    }

    fn remove(&self, s: &mut Self::Stats, i: usize, w: f64) {
        let y = self.y[i];
        s[0] -= w;
        s[1] -= w * y;
        s[2] -= w * y * y;
    }

    fn impurity(&self, s: &Self::Stats) -> f64 {
        if s[0] <= 0.0 {
            return 0.0;
        }
        let mean = s[1] / s[0];
        (s[2] / s[0] - mean * mean).max(0.0)
    }

    fn leaf(&self, idx: &[usize], w: &[f64]) -> Vec<f64> {
        let value = match self.rule {
            LeafRule::Mean => {
                let sw: f64 = idx.iter().map(|&i| w[i]).sum();
                idx.iter().map(|&i| w[i] * self.y[i]).sum::<f64>() / sw
            }
            LeafRule::MultinomialNewton { n_classes } => {
                let k = n_classes as f64;
                let num: f64 = idx.iter().map(|&i| w[i] * self.y[i]).sum();
                let den: f64 = idx
                    .iter()
                    .map(|&i| {
                        let a = self.y[i].abs();
                        w[i] * a * (1.0 - a)
                    })
                    .sum();
                if den.abs() < 1e-150 {
                    0.0
                } else {
                    (k - 1.0) / k * num / den
                }
            }
        };
        vec![value]
    }
}

struct Builder<'a, C: Criterion> {
    x: &'a Matrix,
    w: &'a [f64],
    crit: C,
    params: &'a TreeParams,
    max_features: usize,
    nodes: Vec<TreeNode>,
    importance: Vec<f64>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    score: f64,
}

impl<C: Criterion> Builder<'_, C> {
    fn build(&mut self, idx: Vec<usize>, depth: usize, rng: &mut SeededRng) -> usize {
        let mut stats = self.crit.empty();
        for &i in &idx {
            self.crit.add(&mut stats, i, self.w[i]);
        }
        let impurity = self.crit.impurity(&stats);
        let at = self.nodes.len();
        self.nodes.push(TreeNode::Leaf { value: Vec::new() });

        let depth_ok = self.params.max_depth.is_none_or(|d| depth < d);
        let can_split = depth_ok
            && idx.len() >= self.params.min_samples_split
            && idx.len() >= 2 * self.params.min_samples_leaf
            && impurity > 1e-15;
        let split = if can_split {
            self.find_split(&idx, &stats, rng)
        } else {
            None
        };
        let Some(best) = split else {
            self.nodes[at] = TreeNode::Leaf {
                value: self.crit.leaf(&idx, self.w),
            };
            return at;
        };

        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = idx
            .iter()
            .partition(|&&i| self.x.get(i, best.feature) <= best.threshold);
        let parent_w = weight_of(&idx, self.w);
        // score = Σ_children w·impurity
        self.importance[best.feature] += parent_w * impurity - best.score;
        let left = self.build(left_idx, depth + 1, rng);
        let right = self.build(right_idx, depth + 1, rng);
        self.nodes[at] = TreeNode::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
        };
        at
    }

    fn find_split(
        &self,
        idx: &[usize],
        total: &C::Stats,
        rng: &mut SeededRng,
    ) -> Option<BestSplit> {
        let mut features: Vec<usize> = (0..self.x.cols()).collect();
        if self.max_features < features.len() || self.params.splitter == Splitter::Random {
            features.shuffle(rng);
        }
        let mut best: Option<BestSplit> = None;
        let mut visited = 0;
        let mut column: Vec<(f64, usize)> = Vec::with_capacity(idx.len());
        for f in features {
            if visited >= self.max_features && best.is_some() {
                break;
            }
            column.clear();
            column.extend(idx.iter().map(|&i| (self.x.get(i, f), i)));
            let (lo, hi) = column
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(v, _)| {
                    (lo.min(v), hi.max(v))
                });
            if hi <= lo {
                continue;
            }
            visited += 1;
            let candidate = match self.params.splitter {
                Splitter::Best => self.best_threshold(f, &mut column, total),
                Splitter::Random => {
                    let t = rng.gen_range(lo..hi);
                    self.score_threshold(f, &column, t)
                }
            };
            if let Some(c) = candidate {
                if best.as_ref().is_none_or(|b| c.score < b.score) {
                    best = Some(c);
                }
            }
        }
        best
    }

    fn best_threshold(
        &self,
        f: usize,
        column: &mut [(f64, usize)],
        total: &C::Stats,
    ) -> Option<BestSplit> {
        column.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let n = column.len();
        let min_leaf = self.params.min_samples_leaf;
        let mut left = self.crit.empty();
        let mut right = total.clone();
        let mut wl = 0.0;
        let mut wr = weight_of_stats(column, self.w);
        let mut best: Option<BestSplit> = None;
        for p in 0..n - 1 {
            let (v, i) = column[p];
            let w = self.w[i];
            self.crit.add(&mut left, i, w);
            self.crit.remove(&mut right, i, w);
            wl += w;
            wr -= w;
            let next = column[p + 1].0;
            if next <= v || p + 1 < min_leaf || n - p - 1 < min_leaf {
                continue;
            }
            let score = wl * self.crit.impurity(&left) + wr * self.crit.impurity(&right);
            if best.as_ref().is_none_or(|b| score < b.score) {
                best = Some(BestSplit {
                    feature: f,
                    threshold: 0.5 * (v + next),
                    score,
                });
            }
        }
        best
    }

    fn score_threshold(&self, f: usize, column: &[(f64, usize)], t: f64) -> Option<BestSplit> {
        let mut left = self.crit.empty();
        let mut right = self.crit.empty();
        let (mut wl, mut wr) = (0.0, 0.0);
        let (mut nl, mut nr) = (0, 0);
        for &(v, i) in column {
            let w = self.w[i];
            if v <= t {
                self.crit.add(&mut left, i, w);
                wl += w;
                nl += 1;
            } else {
                self.crit.add(&mut right, i, w);
                wr += w;
                nr += 1;
            }
        }
        let min_leaf = self.params.min_samples_leaf.max(1);
        if nl < min_leaf || nr < min_leaf {
            return None;
        }
        Some(BestSplit {
            feature: f,
            threshold: t,
            score: wl * self.crit.impurity(&left) + wr * self.crit.impurity(&right),
        })
    }
}

fn weight_of(idx: &[usize], w: &[f64]) -> f64 {
    idx.iter().map(|&i| w[i]).sum()
}

fn weight_of_stats(column: &[(f64, usize)], w: &[f64]) -> f64 {
    column.iter().map(|&(_, i)| w[i]).sum()
}

/// Rows with positive weight, the only ones a tree ever sees.
fn active_rows(weights: &[f64]) -> Vec<usize> {
    (0..weights.len()).filter(|&i| weights[i] > 0.0).collect()
}

pub fn fit_classifier(
    x: &Matrix,
    labels: &[usize],
    n_classes: usize,
    weights: &[f64],
    params: &TreeParams,
    rng: &mut SeededRng,
) -> Tree {
    let crit = Gini { labels, n_classes };
    grow(x, weights, crit, params, rng)
}

pub fn fit_regressor(
    x: &Matrix,
    y: &[f64],
    rule: LeafRule,
    weights: &[f64],
    params: &TreeParams,
    rng: &mut SeededRng,
) -> Tree {
    let crit = SquaredError { y, rule };
    grow(x, weights, crit, params, rng)
}

fn grow<C: Criterion>(
    x: &Matrix,
    weights: &[f64],
    crit: C,
    params: &TreeParams,
    rng: &mut SeededRng,
) -> Tree {
    assert_eq!(weights.len(), x.rows(), "weight length mismatch");
    let mut b = Builder {
        x,
        w: weights,
        crit,
        params,
        max_features: params.max_features.resolve(x.cols()),
        nodes: Vec::new(),
        importance: vec![0.0; x.cols()],
    };
    b.build(active_rows(weights), 0, rng);
    Tree {
        nodes: b.nodes,
        n_features: x.cols(),
        impurity_decrease: b.importance,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn stump_splits_on_informative_feature() {
        let x = Matrix::from_rows(&[
            [0.0, 5.0, 1.0, 0.0],
            [1.0, 5.0, 2.0, 0.0],
            [0.0, 5.0, 3.0, 1.0],
            [1.0, 5.0, 4.0, 1.0],
        ]);
        let y = [0, 0, 1, 1];
        let params = TreeParams {
            max_depth: Some(1),
            ..Default::default()
        };
        let t = fit_classifier(&x, &y, 2, &[1.0; 4], &params, &mut rng::seeded(0));
        // feature 2 and 3 both separate perfectly; the first found wins.
        match &t.nodes[0] {
            TreeNode::Split {
                feature, threshold, ..
            } => {
                assert_eq!(*feature, 2);
                assert_eq!(*threshold, 2.5);
            }
            other => panic!("expected split, got {other:?}"),
        }
        assert_eq!(t.feature_importances(), vec![0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn pure_node_is_leaf() {
        let x = Matrix::from_rows(&[[1.0], [2.0]]);
        let t = fit_classifier(
            &x,
            &[1, 1],
            2,
            &[1.0, 1.0],
            &TreeParams::default(),
            &mut rng::seeded(0),
        );
        assert_eq!(t.nodes.len(), 1);
        assert_eq!(t.leaf_value(&[0.0]), &[0.0, 1.0]);
    }

    #[test]
    fn regression_mean_leaves() {
        let x = Matrix::from_rows(&[[0.0], [1.0], [2.0], [3.0]]);
        let y = [1.0, 1.0, 5.0, 5.0];
        let t = fit_regressor(
            &x,
            &y,
            LeafRule::Mean,
            &[1.0; 4],
            &TreeParams::default(),
            &mut rng::seeded(0),
        );
        assert_eq!(t.leaf_value(&[0.2]), &[1.0]);
        assert_eq!(t.leaf_value(&[2.7]), &[5.0]);
    }

    #[test]
    fn zero_weight_rows_ignored() {
        let x = Matrix::from_rows(&[[0.0], [1.0], [2.0]]);
        let t = fit_classifier(
            &x,
            &[0, 1, 1],
            2,
            &[0.0, 1.0, 1.0],
            &TreeParams::default(),
            &mut rng::seeded(0),
        );
        assert_eq!(t.nodes.len(), 1);
    }

    #[test]
    fn random_splitter_respects_depth() {
        let x = Matrix::from_rows(
            &(0..40)
                .map(|i| [i as f64, (i * 7 % 11) as f64])
                .collect::<Vec<_>>(),
        );
        let y: Vec<usize> = (0..40).map(|i| (i * 3 % 5 > 2) as usize).collect();
        let params = TreeParams {
            max_depth: Some(3),
            splitter: Splitter::Random,
            ..Default::default()
        };
        let t = fit_classifier(&x, &y, 2, &[1.0; 40], &params, &mut rng::seeded(4));
        assert!(t.depth() <= 3);
    }
}
