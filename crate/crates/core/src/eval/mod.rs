//! Metrics, cross-validation, hyperparameter search, timing and the
//! Wilcoxon signed-rank test.

pub mod cv;
pub mod metrics;
pub mod search;
pub mod wilcoxon;

use thiserror::Error;

pub use cv::{
    cross_validate, stratified_kfold, timed_fit_predict, FoldPlan, FoldResult, Learner, TimedRun,
    TimingRecord,
};
pub use metrics::{confusion, metrics, Averaging, ClassMetrics, ConfusionMatrix, MetricsReport};
pub use search::{default_search_space, randomized_search, ParamDist, SearchResult, SearchSpace};
pub use wilcoxon::{wilcoxon, Alternative, Method, WilcoxonResult};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("label {0} is out of range")]
    LabelOutOfRange(usize),
    #[error("confusion matrix is empty")]
    EmptyMatrix,
    #[error("class {class} has {count} rows, fewer than k = {k}")]
    ClassSmallerThanK {
        class: usize,
        count: usize,
        k: usize,
    },
    #[error("k = {0} folds requested; need at least 2")]
    InvalidFolds(usize),
    #[error("fold plan covers {plan_rows} rows but the table has {table_rows}")]
    PlanMismatch { plan_rows: usize, table_rows: usize },
    #[error("all paired differences are zero")]
    AllZeroDifferences,
    #[error("invalid search: {0}")]
    InvalidSearch(String),
}
