//! Classifier families behind one fit/predict contract.
//!
//! A [`ClassifierSpec`] names a [`Family`] plus flat hyperparameters (JSON
//! values so they round-trip through config files and reports). [`fit`]
//! validates the hyperparameters, trains, and returns a [`FittedModel`].

pub mod boosting;
pub mod ensemble;
pub mod knn;
pub mod linear;
pub mod mlp;
pub mod tree;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::matrix::Matrix;
use crate::neural::NeuralError;
use crate::rng;
use boosting::{AdaBoost, AdaboostParams, GboostParams, GradientBoosting};
use ensemble::{argmax, Forest, ForestParams};
use knn::Knn;
use linear::{LogisticRegression, LogregParams};
use mlp::{Mlp, MlpParams};
use tree::{MaxFeatures, Tree, TreeParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("training labels contain fewer than two classes")]
    SingleClassTraining,
    #[error("invalid hyperparameter `{name}` for {family}: {reason}")]
    InvalidHyperparameter {
        family: Family,
        name: String,
        reason: String,
    },
    #[error("{0} does not expose feature importances")]
    UnsupportedFamily(Family),
    #[error("training data is empty or mismatched: {0}")]
    BadInput(String),
    #[error("unknown classifier family `{0}`")]
    UnknownFamily(String),
    #[error(transparent)]
    Neural(#[from] NeuralError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Logreg,
    Knn,
    Dtree,
    Rforest,
    Etrees,
    Gboost,
    Adaboost,
    Mlp,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Self::Logreg,
        Self::Knn,
        Self::Dtree,
        Self::Rforest,
        Self::Etrees,
        Self::Gboost,
        Self::Adaboost,
        Self::Mlp,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Self::Logreg => "logreg",
            Self::Knn => "knn",
            Self::Dtree => "dtree",
            Self::Rforest => "rforest",
            Self::Etrees => "etrees",
            Self::Gboost => "gboost",
            Self::Adaboost => "adaboost",
            Self::Mlp => "mlp",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Self::Logreg => "Logistic Regression",
            Self::Knn => "K-Nearest Neighbors",
            Self::Dtree => "Decision Tree",
            Self::Rforest => "Random Forest",
            Self::Etrees => "Extra Trees",
            Self::Gboost => "Gradient Boosting",
            Self::Adaboost => "AdaBoost",
            Self::Mlp => "MLP Classifier",
        }
    }

    fn allowed(self) -> &'static [&'static str] {
        const TREE: [&str; 3] = ["max_depth", "min_samples_split", "min_samples_leaf"];
        match self {
            Self::Logreg => &["l2", "max_iter", "tol"],
            Self::Knn => &["k"],
            Self::Dtree => &TREE,
            Self::Rforest | Self::Etrees => &[
                "n_trees",
                "max_depth",
                "min_samples_split",
                "min_samples_leaf",
                "max_features",
                "bootstrap",
            ],
            Self::Gboost => &[
                "n_stages",
                "learning_rate",
                "max_depth",
                "min_samples_split",
                "min_samples_leaf",
            ],
            Self::Adaboost => &["n_estimators", "learning_rate", "max_depth"],
            Self::Mlp => &["hidden", "epochs", "learning_rate", "batch_size", "l2"],
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Family {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|f| f.key() == s.trim())
            .ok_or_else(|| ModelError::UnknownFamily(s.to_string()))
    }
}

/// Hyperparameters absent from the map take the family defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSpec {
    pub family: Family,
    #[serde(default)]
    pub hyperparameters: BTreeMap<String, Value>,
    #[serde(default)]
    pub seed: u64,
}

impl ClassifierSpec {
    pub fn new(family: Family) -> Self {
        Self {
            family,
            hyperparameters: BTreeMap::new(),
            seed: 0,
        }
    }

    pub fn with(mut self, name: &str, value: impl Into<Value>) -> Self {
        self.hyperparameters.insert(name.to_string(), value.into());
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Checks names and value types without training.
    pub fn validate(&self) -> Result<(), ModelError> {
        self.resolve().map(|_| ())
    }

    /// The same spec with every default hyperparameter written out.
    pub fn resolved(&self) -> Result<ClassifierSpec, ModelError> {
        fn depth(d: Option<usize>) -> Value {
            d.map_or(Value::Null, Value::from)
        }
        fn tree(t: &TreeParams) -> Vec<(&'static str, Value)> {
            vec![
                ("max_depth", depth(t.max_depth)),
                ("min_samples_split", t.min_samples_split.into()),
                ("min_samples_leaf", t.min_samples_leaf.into()),
            ]
        }
        let pairs: Vec<(&str, Value)> = match self.resolve()? {
            Resolved::Logreg(p) => vec![
                ("l2", p.l2.into()),
                ("max_iter", p.max_iter.into()),
                ("tol", p.tol.into()),
            ],
            Resolved::Knn(k) => vec![("k", k.into())],
            Resolved::Dtree(p) => tree(&p),
            Resolved::Forest(p) => {
                let mut v = tree(&p.tree);
                v.push(("n_trees", p.n_trees.into()));
                v.push(("bootstrap", p.bootstrap.into()));
                v.push((
                    "max_features",
                    match p.tree.max_features {
                        MaxFeatures::All => "all".into(),
                        MaxFeatures::Sqrt => "sqrt".into(),
                        MaxFeatures::Count(n) => n.into(),
                    },
                ));
                v
            }
            Resolved::Gboost(p) => {
                let mut v = tree(&p.tree);
                v.push(("n_stages", p.n_stages.into()));
                v.push(("learning_rate", p.learning_rate.into()));
                v
            }
            Resolved::Adaboost(p) => vec![
                ("n_estimators", p.n_estimators.into()),
                ("learning_rate", p.learning_rate.into()),
                ("max_depth", depth(p.tree.max_depth)),
            ],
            Resolved::Mlp(p) => vec![
                ("hidden", p.hidden.clone().into()),
                ("epochs", p.epochs.into()),
                ("learning_rate", p.learning_rate.into()),
                ("batch_size", p.batch_size.into()),
                ("l2", p.l2.into()),
            ],
        };
        Ok(ClassifierSpec {
            family: self.family,
            hyperparameters: pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            seed: self.seed,
        })
    }

    fn resolve(&self) -> Result<Resolved, ModelError> {
        let p = Params {
            family: self.family,
            map: &self.hyperparameters,
        };
        for name in self.hyperparameters.keys() {
            if !self.family.allowed().contains(&name.as_str()) {
                return Err(p.err(name, "unknown name"));
            }
        }
        Ok(match self.family {
            Family::Logreg => {
                let d = LogregParams::default();
                Resolved::Logreg(LogregParams {
                    l2: p.float("l2", d.l2, 0.0)?,
                    max_iter: p.count("max_iter", d.max_iter, 1)?,
                    tol: p.float("tol", d.tol, 0.0)?,
                })
            }
            Family::Knn => Resolved::Knn(p.count("k", 5, 1)?),
            Family::Dtree => Resolved::Dtree(p.tree(TreeParams::default())?),
            Family::Rforest | Family::Etrees => {
                let d = if self.family == Family::Rforest {
                    ForestParams::random_forest()
                } else {
                    ForestParams::extra_trees()
                };
                let mut tree = p.tree(d.tree.clone())?;
                tree.max_features = p.max_features(d.tree.max_features)?;
                Resolved::Forest(ForestParams {
                    n_trees: p.count("n_trees", d.n_trees, 1)?,
                    bootstrap: p.boolean("bootstrap", d.bootstrap)?,
                    tree,
                })
            }
            Family::Gboost => {
                let d = GboostParams::default();
                Resolved::Gboost(GboostParams {
                    n_stages: p.count("n_stages", d.n_stages, 0)?,
                    learning_rate: p.float("learning_rate", d.learning_rate, 0.0)?,
                    tree: p.tree(d.tree)?,
                })
            }
            Family::Adaboost => {
                let d = AdaboostParams::default();
                let mut tree = d.tree.clone();
                tree.max_depth = p.depth(d.tree.max_depth)?;
                Resolved::Adaboost(AdaboostParams {
                    n_estimators: p.count("n_estimators", d.n_estimators, 1)?,
                    learning_rate: p.float("learning_rate", d.learning_rate, 1e-300)?,
                    tree,
                })
            }
            Family::Mlp => {
                let d = MlpParams::default();
                Resolved::Mlp(MlpParams {
                    hidden: p.list("hidden", d.hidden)?,
                    epochs: p.count("epochs", d.epochs, 1)?,
                    learning_rate: p.float("learning_rate", d.learning_rate, 0.0)?,
                    batch_size: p.count("batch_size", d.batch_size, 1)?,
                    l2: p.float("l2", d.l2, 0.0)?,
                })
            }
        })
    }
}

enum Resolved {
    Logreg(LogregParams),
    Knn(usize),
    Dtree(TreeParams),
    Forest(ForestParams),
    Gboost(GboostParams),
    Adaboost(AdaboostParams),
    Mlp(MlpParams),
}

struct Params<'a> {
    family: Family,
    map: &'a BTreeMap<String, Value>,
}

impl Params<'_> {
    fn err(&self, name: &str, reason: &str) -> ModelError {
        ModelError::InvalidHyperparameter {
            family: self.family,
            name: name.to_string(),
            reason: reason.to_string(),
        }
    }

    fn float(&self, name: &str, default: f64, min: f64) -> Result<f64, ModelError> {
        match self.map.get(name) {
            None => Ok(default),
            Some(v) => {
                let x = v
                    .as_f64()
                    .ok_or_else(|| self.err(name, "expected a number"))?;
                if !x.is_finite() || x < min {
                    return Err(self.err(name, &format!("must be finite and >= {min}")));
                }
                Ok(x)
            }
        }
    }

    fn count(&self, name: &str, default: usize, min: usize) -> Result<usize, ModelError> {
        match self.map.get(name) {
            None => Ok(default),
            Some(v) => {
                let x = v
                    .as_u64()
                    .ok_or_else(|| self.err(name, "expected a non-negative integer"))?
                    as usize;
                if x < min {
                    return Err(self.err(name, &format!("must be >= {min}")));
                }
                Ok(x)
            }
        }
    }

    fn boolean(&self, name: &str, default: bool) -> Result<bool, ModelError> {
        match self.map.get(name) {
            None => Ok(default),
            Some(v) => v
                .as_bool()
                .ok_or_else(|| self.err(name, "expected a boolean")),
        }
    }

    fn depth(&self, default: Option<usize>) -> Result<Option<usize>, ModelError> {
        match self.map.get("max_depth") {
            None => Ok(default),
            Some(Value::Null) => Ok(None),
            Some(Value::String(s)) if s.eq_ignore_ascii_case("none") => Ok(None),
            Some(_) => Ok(Some(self.count("max_depth", 0, 1)?)),
        }
    }

    fn tree(&self, d: TreeParams) -> Result<TreeParams, ModelError> {
        Ok(TreeParams {
            max_depth: self.depth(d.max_depth)?,
            min_samples_split: self.count("min_samples_split", d.min_samples_split, 2)?,
            min_samples_leaf: self.count("min_samples_leaf", d.min_samples_leaf, 1)?,
            ..d
        })
    }

    fn max_features(&self, default: MaxFeatures) -> Result<MaxFeatures, ModelError> {
        match self.map.get("max_features") {
            None => Ok(default),
            Some(Value::String(s)) if s == "sqrt" => Ok(MaxFeatures::Sqrt),
            Some(Value::String(s)) if s == "all" => Ok(MaxFeatures::All),
            Some(_) => Ok(MaxFeatures::Count(self.count("max_features", 0, 1)?)),
        }
    }

    fn list(&self, name: &str, default: Vec<usize>) -> Result<Vec<usize>, ModelError> {
        match self.map.get(name) {
            None => Ok(default),
            Some(Value::Array(a)) if !a.is_empty() => a
                .iter()
                .map(|v| {
                    v.as_u64()
                        .filter(|&x| x > 0)
                        .map(|x| x as usize)
                        .ok_or_else(|| self.err(name, "expected positive integers"))
                })
                .collect(),
            Some(Value::Number(n)) if n.as_u64().is_some_and(|x| x > 0) => {
                Ok(vec![n.as_u64().unwrap() as usize])
            }
            Some(_) => Err(self.err(name, "expected a non-empty list of layer widths")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModelKind {
    Logreg(LogisticRegression),
    Knn(Knn),
    Dtree(Tree),
    Forest(Forest),
    Gboost(GradientBoosting),
    Adaboost(AdaBoost),
    Mlp(Mlp),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub family: Family,
    pub n_classes: usize,
    pub n_features: usize,
    pub model: ModelKind,
}

/// Trains `spec` on `(x, labels)`. Deterministic given `spec.seed`.
pub fn fit(spec: &ClassifierSpec, x: &Matrix, labels: &[usize]) -> Result<FittedModel, ModelError> {
    if x.rows() == 0 || x.rows() != labels.len() {
        return Err(ModelError::BadInput(format!(
            "{} rows, {} labels",
            x.rows(),
            labels.len()
        )));
    }
    let mut seen = labels.to_vec();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() < 2 {
        return Err(ModelError::SingleClassTraining);
    }
    let n_classes = seen.last().unwrap() + 1;
    let resolved = spec.resolve()?;
    let seed = rng::derive_seed(spec.seed, spec.family as u64);
    let model = match resolved {
        Resolved::Logreg(p) => ModelKind::Logreg(LogisticRegression::fit(x, labels, n_classes, &p)),
        Resolved::Knn(k) => ModelKind::Knn(Knn::fit(x, labels, n_classes, k)),
        Resolved::Dtree(p) => {
            let w = vec![1.0; x.rows()];
            ModelKind::Dtree(tree::fit_classifier(
                x,
                labels,
                n_classes,
                &w,
                &p,
                &mut rng::seeded(seed),
            ))
        }
        Resolved::Forest(p) => ModelKind::Forest(Forest::fit(x, labels, n_classes, &p, seed)),
        Resolved::Gboost(p) => {
            ModelKind::Gboost(GradientBoosting::fit(x, labels, n_classes, &p, seed))
        }
        Resolved::Adaboost(p) => ModelKind::Adaboost(AdaBoost::fit(x, labels, n_classes, &p, seed)),
        Resolved::Mlp(p) => ModelKind::Mlp(Mlp::fit(x, labels, n_classes, &p, seed)?),
    };
    Ok(FittedModel {
        family: spec.family,
        n_classes,
        n_features: x.cols(),
        model,
    })
}

impl FittedModel {
    /// Class-probability rows (each sums to 1).
    pub fn predict_proba(&self, x: &Matrix) -> Result<Matrix, ModelError> {
        if x.cols() != self.n_features {
            return Err(ModelError::BadInput(format!(
                "expected {} feature columns, found {}",
                self.n_features,
                x.cols()
            )));
        }
        Ok(match &self.model {
            ModelKind::Logreg(m) => m.predict_proba(x),
            ModelKind::Knn(m) => m.predict_proba(x),
            ModelKind::Dtree(t) => {
                let mut out = Matrix::zeros(x.rows(), self.n_classes);
                for i in 0..x.rows() {
                    out.row_mut(i).copy_from_slice(t.leaf_value(x.row(i)));
                }
                out
            }
            ModelKind::Forest(m) => m.predict_proba(x),
            ModelKind::Gboost(m) => m.predict_proba(x),
            ModelKind::Adaboost(m) => m.predict_proba(x),
            ModelKind::Mlp(m) => m.predict_proba(x)?,
        })
    }

    /// Arg-max of [`FittedModel::predict_proba`], ties to the lower class.
    pub fn predict(&self, x: &Matrix) -> Result<Vec<usize>, ModelError> {
        let p = self.predict_proba(x)?;
        Ok(p.iter_rows().map(argmax).collect())
    }

    /// Normalized impurity-decrease importances (tree families only).
    pub fn feature_importances(&self) -> Result<Vec<f64>, ModelError> {
        match &self.model {
            ModelKind::Dtree(t) => Ok(t.feature_importances()),
            ModelKind::Forest(m) => Ok(m.feature_importances()),
            ModelKind::Gboost(m) => Ok(m.feature_importances()),
            ModelKind::Adaboost(m) => Ok(m.feature_importances()),
            _ => Err(ModelError::UnsupportedFamily(self.family)),
        }
    }
}
