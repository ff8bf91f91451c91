//! Randomized hyperparameter search scored by mean fold accuracy.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::cv::{cross_validate, FoldPlan, Learner};
use super::metrics::Averaging;
use super::EvalError;
use crate::dataset::DataTable;
use crate::models::{ClassifierSpec, Family};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "snake_case")]
pub enum ParamDist {
    /// Integers in `[lo, hi]`.
    IntUniform {
        lo: i64,
        hi: i64,
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
    LogUniform {
        lo: f64,
        hi: f64,
    },
    Choice {
        values: Vec<Value>,
    },
}

impl ParamDist {
    fn sample(&self, r: &mut rng::Rng) -> Value {
        match self {
            Self::IntUniform { lo, hi } => Value::from(r.gen_range(*lo..=*hi)),
            Self::Uniform { lo, hi } => Value::from(r.gen_range(*lo..=*hi)),
            Self::LogUniform { lo, hi } => Value::from(r.gen_range(lo.ln()..=hi.ln()).exp()),
            Self::Choice { values } => values[r.gen_range(0..values.len())].clone(),
        }
    }
}

pub type SearchSpace = BTreeMap<String, ParamDist>;

/// Ranges centred on each family's defaults.
pub fn default_search_space(family: Family) -> SearchSpace {
    use ParamDist::*;
    let depth = Choice {
        values: vec![Value::Null, 4.into(), 8.into(), 16.into()],
    };
    let entries: Vec<(&str, ParamDist)> = match family {
        Family::Logreg => vec![("l2", LogUniform { lo: 1e-5, hi: 1.0 })],
        Family::Knn => vec![("k", IntUniform { lo: 1, hi: 15 })],
        Family::Dtree => vec![
            ("max_depth", depth),
            ("min_samples_leaf", IntUniform { lo: 1, hi: 5 }),
        ],
        Family::Rforest | Family::Etrees => vec![
            ("n_trees", IntUniform { lo: 50, hi: 300 }),
            ("max_depth", depth),
            ("min_samples_leaf", IntUniform { lo: 1, hi: 4 }),
        ],
        Family::Gboost => vec![
            ("n_stages", IntUniform { lo: 50, hi: 300 }),
            ("learning_rate", LogUniform { lo: 0.02, hi: 0.3 }),
            ("max_depth", IntUniform { lo: 2, hi: 5 }),
        ],
        Family::Adaboost => vec![
            ("n_estimators", IntUniform { lo: 25, hi: 200 }),
            ("learning_rate", LogUniform { lo: 0.1, hi: 1.5 }),
        ],
        Family::Mlp => vec![
            ("learning_rate", LogUniform { lo: 3e-4, hi: 3e-3 }),
            ("l2", LogUniform { lo: 1e-6, hi: 1e-2 }),
        ],
    };
    entries
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchDraw {
    pub spec: ClassifierSpec,
    pub fold_accuracies: Vec<f64>,
    pub mean_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub best: ClassifierSpec,
    pub trace: Vec<SearchDraw>,
}

/// Draw `i` overrides `base` with values sampled from the stream derived
/// from `(seed, i)`; `make` turns each candidate into a learner. The best
/// mean fold accuracy wins, ties going to the earlier draw.
pub fn randomized_search<L, F>(
    base: &ClassifierSpec,
    space: &SearchSpace,
    n_iter: usize,
    table: &DataTable,
    plan: &FoldPlan,
    seed: u64,
    make: F,
) -> Result<SearchResult, L::Error>
where
    L: Learner,
    F: Fn(&ClassifierSpec) -> L,
{
    if n_iter == 0 {
        return Err(EvalError::InvalidSearch("n_iter must be at least 1".into()).into());
    }
    let mut trace = Vec::with_capacity(n_iter);
    for i in 0..n_iter {
        let mut r = rng::derived(seed, i as u64);
        let mut spec = base.clone();
        for (name, dist) in space {
            spec.hyperparameters
                .insert(name.clone(), dist.sample(&mut r));
        }
        spec.validate()
            .map_err(|e| EvalError::InvalidSearch(e.to_string()))?;
        let folds = cross_validate(&make(&spec), table, plan, Averaging::Macro)?;
        let fold_accuracies: Vec<f64> = folds.iter().map(|f| f.metrics.accuracy).collect();
        let mean_accuracy = fold_accuracies.iter().sum::<f64>() / fold_accuracies.len() as f64;
        trace.push(SearchDraw {
            spec,
            fold_accuracies,
            mean_accuracy,
        });
    }
    let mut best = 0;
    for (i, d) in trace.iter().enumerate() {
        if d.mean_accuracy > trace[best].mean_accuracy {
            best = i;
        }
    }
    Ok(SearchResult {
        best: trace[best].spec.clone(),
        trace,
    })
}
