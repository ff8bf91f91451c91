//! Stratified k-fold plans, cross-validation and timed hold-out runs.

use std::time::Instant;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{confusion, metrics, Averaging, ConfusionMatrix, MetricsReport};
use super::EvalError;
use crate::dataset::DataTable;
use crate::matrix::Matrix;
use crate::rng;

/// Anything that can be trained on a labelled table and then label a bare
/// feature matrix. `fit` is the only place training rows are visible.
pub trait Learner: Sync {
    type Model: Send;
    type Error: From<EvalError> + Send;

    fn fit(&self, train: &DataTable) -> Result<Self::Model, Self::Error>;
    fn predict(&self, model: &Self::Model, x: &Matrix) -> Result<Vec<usize>, Self::Error>;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    /// Validation row indices of each fold, ascending.
    pub folds: Vec<Vec<usize>>,
}

impl FoldPlan {
    pub fn n_rows(&self) -> usize {
        self.folds.iter().map(Vec::len).sum()
    }

    /// Rows outside fold `f`, ascending.
    pub fn train_indices(&self, f: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .folds
            .iter()
            .enumerate()
            .filter(|(g, _)| *g != f)
            .flat_map(|(_, v)| v.iter().copied())
            .collect();
        out.sort_unstable();
        out
    }
}

/// Each class is shuffled with its own derived stream, then the classes'
/// rows are dealt to folds by one round-robin counter that carries over
/// from class to class, so both per-class and total fold sizes differ by
/// at most one.
pub fn stratified_kfold(labels: &[usize], k: usize, seed: u64) -> Result<FoldPlan, EvalError> {
    if k < 2 {
        return Err(EvalError::InvalidFolds(k));
    }
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for c in 0..n_classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        if members.is_empty() {
            continue;
        }
        if members.len() < k {
            return Err(EvalError::ClassSmallerThanK {
                class: c,
                count: members.len(),
                k,
            });
        }
        members.shuffle(&mut rng::derived(seed, c as u64));
        for i in members {
            folds[next % k].push(i);
            next += 1;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(FoldPlan { k, seed, folds })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub metrics: MetricsReport,
    pub confusion: ConfusionMatrix,
}

fn n_classes_of(labels: &[usize]) -> usize {
    labels.iter().max().map_or(0, |m| m + 1)
}

/// Fits `learner` on the complement of each fold and scores it on the fold.
/// Folds run in parallel; results come back in fold order.
pub fn cross_validate<L: Learner>(
    learner: &L,
    table: &DataTable,
    plan: &FoldPlan,
    averaging: Averaging,
) -> Result<Vec<FoldResult>, L::Error> {
    if plan.n_rows() != table.n_rows() {
        return Err(EvalError::PlanMismatch {
            plan_rows: plan.n_rows(),
            table_rows: table.n_rows(),
        }
        .into());
    }
    let n_classes = n_classes_of(&table.labels);
    (0..plan.k)
        .into_par_iter()
        .map(|f| {
            let train = table.subset(&plan.train_indices(f));
            let valid = &plan.folds[f];
            let model = learner.fit(&train)?;
            let pred = learner.predict(&model, &table.x.select_rows(valid))?;
            let truth: Vec<usize> = valid.iter().map(|&i| table.labels[i]).collect();
            let cm = confusion(&truth, &pred, n_classes)?;
            Ok(FoldResult {
                metrics: metrics(&cm, averaging)?,
                confusion: cm,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRecord {
    pub train_seconds: f64,
    pub test_ms_total: f64,
    pub test_ms_per_sample: f64,
}

#[derive(Debug)]
pub struct TimedRun<M> {
    pub model: M,
    pub predictions: Vec<usize>,
    pub metrics: MetricsReport,
    pub confusion: ConfusionMatrix,
    pub timing: TimingRecord,
}

/// Trains on `train`, predicts `test`, and times both phases separately.
pub fn timed_fit_predict<L: Learner>(
    learner: &L,
    train: &DataTable,
    test: &DataTable,
    averaging: Averaging,
) -> Result<TimedRun<L::Model>, L::Error> {
    let start = Instant::now();
    let model = learner.fit(train)?;
    let train_seconds = start.elapsed().as_secs_f64();
    let start = Instant::now();
    let predictions = learner.predict(&model, &test.x)?;
    let test_ms_total = start.elapsed().as_secs_f64() * 1e3;
    let n_classes = n_classes_of(&train.labels).max(n_classes_of(&test.labels));
    let cm = confusion(&test.labels, &predictions, n_classes)?;
    Ok(TimedRun {
        model,
        predictions,
        metrics: metrics(&cm, averaging)?,
        confusion: cm,
        timing: TimingRecord {
            train_seconds,
            test_ms_total,
            test_ms_per_sample: test_ms_total / test.n_rows().max(1) as f64,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fold_sizes_balanced() {
        let mut labels = vec![0; 62];
        labels.extend(vec![1; 175]);
        labels.extend(vec![2; 62]);
        let plan = stratified_kfold(&labels, 8, 7).unwrap();
        for f in &plan.folds {
            assert!(f.len() == 37 || f.len() == 38, "{}", f.len());
            for c in 0..3 {
                let n = f.iter().filter(|&&i| labels[i] == c).count();
                let total = labels.iter().filter(|&&l| l == c).count();
                assert!(n == total / 8 || n == total / 8 + 1);
            }
        }
        let mut all: Vec<usize> = plan.folds.concat();
        all.sort_unstable();
        assert_eq!(all, (0..299).collect::<Vec<_>>());
        assert_eq!(plan, stratified_kfold(&labels, 8, 7).unwrap());
    }

    #[test]
    fn tiny_class_one_per_fold() {
        let labels = [0, 0, 0, 1, 1, 1, 1, 1, 1];
        let plan = stratified_kfold(&labels, 3, 1).unwrap();
        for f in &plan.folds {
            assert_eq!(f.iter().filter(|&&i| labels[i] == 0).count(), 1);
        }
        assert!(matches!(
            stratified_kfold(&labels, 4, 1),
            Err(EvalError::ClassSmallerThanK { class: 0, .. })
        ));
    }
}
