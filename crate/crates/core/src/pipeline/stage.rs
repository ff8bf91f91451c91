//! Preprocessing stages: declarative specs and their fitted forms.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::PipelineError;
use crate::dataset::{ColumnKind, ColumnMeta, DataTable};
use crate::feature_select::{self, BorutaConfig, MiConfig, SelectPolicy, Status};
use crate::matrix::Matrix;
use crate::models::ensemble::ForestParams;
use crate::reduce::{self, Autoencoder, AutoencoderConfig, LdaProjection};
use crate::transform::{
    minmax_apply, minmax_fit, robust_apply, robust_fit, smote_tomek, MinMaxParams, ResampleReport,
    RobustScalerParams, TomekPolicy,
};

/// A stage is fitted on training rows only. Fitting returns the
/// transformed training table (which may gain or lose rows) together with
/// a fitted transform for unseen feature rows.
pub trait Stage: Send + Sync + fmt::Debug {
    fn name(&self) -> String;
    fn fit(&self, train: &DataTable) -> Result<(DataTable, Box<dyn FittedStage>), PipelineError>;
}

pub trait FittedStage: Send + Sync + fmt::Debug {
    fn transform(&self, x: &Matrix) -> Result<Matrix, PipelineError>;
    fn summary(&self) -> StageSummary;
}

/// What a fitted stage did, for reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageSummary {
    pub stage: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resample: Option<ResampleReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selected: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub details: Value,
}

impl StageSummary {
    fn named(stage: &str) -> Self {
        Self {
            stage: stage.to_string(),
            resample: None,
            selected: None,
            details: Value::Null,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageKind {
    RobustScaler,
    MinmaxScaler,
    SmoteTomek,
    MiSelect,
    BorutaSelect,
    Lda,
    Autoencoder,
}

impl StageKind {
    pub const ALL: [StageKind; 7] = [
        Self::RobustScaler,
        Self::MinmaxScaler,
        Self::SmoteTomek,
        Self::MiSelect,
        Self::BorutaSelect,
        Self::Lda,
        Self::Autoencoder,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Self::RobustScaler => "robust_scaler",
            Self::MinmaxScaler => "minmax_scaler",
            Self::SmoteTomek => "smote_tomek",
            Self::MiSelect => "mi_select",
            Self::BorutaSelect => "boruta_select",
            Self::Lda => "lda",
            Self::Autoencoder => "autoencoder",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::RobustScaler => "RobustScaler",
            Self::MinmaxScaler => "MinMaxScaler",
            Self::SmoteTomek => "SMOTETomek",
            Self::MiSelect => "MI",
            Self::BorutaSelect => "Boruta",
            Self::Lda => "LDA",
            Self::Autoencoder => "Autoencoder",
        }
    }

    pub fn is_scaler(self) -> bool {
        matches!(self, Self::RobustScaler | Self::MinmaxScaler)
    }

    pub fn is_resampler(self) -> bool {
        self == Self::SmoteTomek
    }

    pub fn is_selector_or_reducer(self) -> bool {
        matches!(
            self,
            Self::MiSelect | Self::BorutaSelect | Self::Lda | Self::Autoencoder
        )
    }

    fn allowed(self) -> &'static [&'static str] {
        match self {
            Self::RobustScaler | Self::MinmaxScaler => &[],
            Self::SmoteTomek => &["k", "policy"],
            Self::MiSelect => &["mode", "k", "bins", "policy", "top_k"],
            Self::BorutaSelect => &["alpha", "max_iter", "n_trees"],
            Self::Lda => &["components", "epsilon"],
            Self::Autoencoder => &[
                "latent_dim",
                "hidden",
                "epochs",
                "learning_rate",
                "batch_size",
            ],
        }
    }
}

impl fmt::Display for StageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for StageKind {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.key() == s.trim())
            .ok_or_else(|| PipelineError::InvalidSpec(format!("unknown stage kind `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageSpec {
    pub kind: StageKind,
    #[serde(default)]
    pub parameters: BTreeMap<String, Value>,
}

impl StageSpec {
    pub fn new(kind: StageKind) -> Self {
        Self {
            kind,
            parameters: BTreeMap::new(),
        }
    }

    pub fn with(mut self, name: &str, value: impl Into<Value>) -> Self {
        self.parameters.insert(name.to_string(), value.into());
        self
    }

    /// The same spec with every default written out.
    pub fn resolved(&self) -> Result<StageSpec, PipelineError> {
        let params = self.params()?;
        Ok(StageSpec {
            kind: self.kind,
            parameters: params.echo(),
        })
    }

    pub(crate) fn params(&self) -> Result<StageParams, PipelineError> {
        let p = Reader {
            kind: self.kind,
            map: &self.parameters,
        };
        for name in self.parameters.keys() {
            if !self.kind.allowed().contains(&name.as_str()) {
                return Err(p.err(name, "unknown parameter"));
            }
        }
        Ok(match self.kind {
            StageKind::RobustScaler => StageParams::Robust,
            StageKind::MinmaxScaler => StageParams::MinMax,
            StageKind::SmoteTomek => StageParams::SmoteTomek {
                k: p.count("k", 5, 1)?,
                policy: match p.text("policy", "both")?.as_str() {
                    "both" => TomekPolicy::Both,
                    "majority_member" => TomekPolicy::MajorityMember,
                    _ => return Err(p.err("policy", "expected both or majority_member")),
                },
            },
            StageKind::MiSelect => {
                let config = match p.text("mode", "knn")?.as_str() {
                    "knn" => MiConfig::Knn {
                        k: p.count("k", 3, 1)?,
                    },
                    "histogram" => MiConfig::Histogram {
                        bins: p.count("bins", 10, 1)?,
                    },
                    _ => return Err(p.err("mode", "expected knn or histogram")),
                };
                let policy = match p.text("policy", "above_mean")?.as_str() {
                    "above_mean" => SelectPolicy::AboveMean,
                    "top_k" => SelectPolicy::TopK {
                        k: p.count("top_k", 10, 1)?,
                    },
                    _ => return Err(p.err("policy", "expected above_mean or top_k")),
                };
                StageParams::Mi { config, policy }
            }
            StageKind::BorutaSelect => StageParams::Boruta {
                alpha: p.float("alpha", 0.05)?,
                max_iter: p.count("max_iter", 100, 10)?,
                n_trees: p.count("n_trees", 100, 1)?,
            },
            StageKind::Lda => StageParams::Lda {
                components: p.count("components", 2, 1)?,
                epsilon: match self.parameters.get("epsilon") {
                    None | Some(Value::Null) => None,
                    Some(_) => Some(p.float("epsilon", 0.0)?),
                },
            },
            StageKind::Autoencoder => {
                let d = AutoencoderConfig::default();
                StageParams::Autoencoder {
                    latent_dim: p.count("latent_dim", d.latent_dim, 1)?,
                    hidden: match self.parameters.get("hidden") {
                        None | Some(Value::Null) => None,
                        Some(Value::Array(a)) => Some(
                            a.iter()
                                .map(|v| v.as_u64().filter(|&x| x > 0).map(|x| x as usize))
                                .collect::<Option<Vec<_>>>()
                                .ok_or_else(|| p.err("hidden", "expected positive integers"))?,
                        ),
                        Some(_) => return Err(p.err("hidden", "expected a list")),
                    },
                    epochs: p.count("epochs", d.epochs, 1)?,
                    learning_rate: p.float("learning_rate", d.learning_rate)?,
                    batch_size: p.count("batch_size", d.batch_size, 1)?,
                }
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum StageParams {
    Robust,
    MinMax,
    SmoteTomek {
        k: usize,
        policy: TomekPolicy,
    },
    Mi {
        config: MiConfig,
        policy: SelectPolicy,
    },
    Boruta {
        alpha: f64,
        max_iter: usize,
        n_trees: usize,
    },
    Lda {
        components: usize,
        epsilon: Option<f64>,
    },
    Autoencoder {
        latent_dim: usize,
        hidden: Option<Vec<usize>>,
        epochs: usize,
        learning_rate: f64,
        batch_size: usize,
    },
}

impl StageParams {
    fn echo(&self) -> BTreeMap<String, Value> {
        let pairs: Vec<(&str, Value)> = match self {
            Self::Robust | Self::MinMax => vec![],
            Self::SmoteTomek { k, policy } => vec![
                ("k", (*k).into()),
                ("policy", serde_json::to_value(policy).unwrap()),
            ],
            Self::Mi { config, policy } => {
                let mut v = match config {
                    MiConfig::Knn { k } => vec![("mode", "knn".into()), ("k", (*k).into())],
                    MiConfig::Histogram { bins } => {
                        vec![("mode", "histogram".into()), ("bins", (*bins).into())]
                    }
                };
                match policy {
                    SelectPolicy::AboveMean => v.push(("policy", "above_mean".into())),
                    SelectPolicy::TopK { k } => {
                        v.push(("policy", "top_k".into()));
                        v.push(("top_k", (*k).into()));
                    }
                }
                v
            }
            Self::Boruta {
                alpha,
                max_iter,
                n_trees,
            } => vec![
                ("alpha", (*alpha).into()),
                ("max_iter", (*max_iter).into()),
                ("n_trees", (*n_trees).into()),
            ],
            Self::Lda {
                components,
                epsilon,
            } => vec![
                ("components", (*components).into()),
                ("epsilon", epsilon.map_or(Value::Null, Value::from)),
            ],
            Self::Autoencoder {
                latent_dim,
                hidden,
                epochs,
                learning_rate,
                batch_size,
            } => vec![
                ("latent_dim", (*latent_dim).into()),
                ("hidden", hidden.clone().map_or(Value::Null, Value::from)),
                ("epochs", (*epochs).into()),
                ("learning_rate", (*learning_rate).into()),
                ("batch_size", (*batch_size).into()),
            ],
        };
        pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }
}

struct Reader<'a> {
    kind: StageKind,
    map: &'a BTreeMap<String, Value>,
}

impl Reader<'_> {
    fn err(&self, name: &str, reason: &str) -> PipelineError {
        PipelineError::InvalidSpec(format!("{} parameter `{name}`: {reason}", self.kind))
    }

    fn count(&self, name: &str, default: usize, min: usize) -> Result<usize, PipelineError> {
        match self.map.get(name) {
            None => Ok(default),
            Some(v) => match v.as_u64() {
                Some(x) if x as usize >= min => Ok(x as usize),
                _ => Err(self.err(name, &format!("expected an integer >= {min}"))),
            },
        }
    }

    fn float(&self, name: &str, default: f64) -> Result<f64, PipelineError> {
        match self.map.get(name) {
            None => Ok(default),
            Some(v) => match v.as_f64() {
                Some(x) if x.is_finite() && x >= 0.0 => Ok(x),
                _ => Err(self.err(name, "expected a non-negative number")),
            },
        }
    }

    fn text(&self, name: &str, default: &str) -> Result<String, PipelineError> {
        match self.map.get(name) {
            None => Ok(default.to_string()),
            Some(Value::String(s)) => Ok(s.clone()),
            Some(_) => Err(self.err(name, "expected a string")),
        }
    }
}

/// A built-in stage bound to a seed.
#[derive(Debug, Clone)]
pub struct BuiltinStage {
    pub spec: StageSpec,
    pub seed: u64,
    params: StageParams,
}

impl BuiltinStage {
    pub fn new(spec: &StageSpec, seed: u64) -> Result<Self, PipelineError> {
        Ok(Self {
            params: spec.params()?,
            spec: spec.clone(),
            seed,
        })
    }
}

fn named_columns(prefix: &str, m: usize) -> Vec<ColumnMeta> {
    (1..=m)
        .map(|i| ColumnMeta {
            name: format!("{prefix}_{i}"),
            kind: ColumnKind::Numeric,
        })
        .collect()
}

fn stage_error(kind: StageKind, e: impl fmt::Display) -> PipelineError {
    PipelineError::Stage {
        kind,
        message: e.to_string(),
    }
}

impl Stage for BuiltinStage {
    fn name(&self) -> String {
        self.spec.kind.key().to_string()
    }

    fn fit(&self, train: &DataTable) -> Result<(DataTable, Box<dyn FittedStage>), PipelineError> {
        let kind = self.spec.kind;
        match &self.params {
            StageParams::Robust => {
                let p = robust_fit(&train.x);
                let out = DataTable {
                    x: robust_apply(&p, &train.x),
                    ..train.clone()
                };
                Ok((out, Box::new(FittedRobust(p))))
            }
            StageParams::MinMax => {
                let p = minmax_fit(&train.x);
                let out = DataTable {
                    x: minmax_apply(&p, &train.x),
                    ..train.clone()
                };
                Ok((out, Box::new(FittedMinMax(p))))
            }
            StageParams::SmoteTomek { k, policy } => {
                let (out, report) =
                    smote_tomek(train, *k, self.seed, *policy).map_err(|e| stage_error(kind, e))?;
                Ok((out, Box::new(FittedResampler(report))))
            }
            StageParams::Mi { config, policy } => {
                let scores = feature_select::mutual_info(&train.x, &train.labels, *config)
                    .map_err(|e| stage_error(kind, e))?;
                let mut keep = feature_select::select_top(&scores.mi, *policy)
                    .map_err(|e| stage_error(kind, e))?;
                let fallback = keep.is_empty();
                if fallback {
                    keep = (0..train.n_cols()).collect();
                }
                let details = serde_json::json!({
                    "scores": train.column_names().into_iter().zip(scores.mi.iter().copied())
                        .collect::<BTreeMap<String, f64>>(),
                    "kept_all_because_empty": fallback,
                });
                Ok(selection(train, keep, "mi_select", details))
            }
            StageParams::Boruta {
                alpha,
                max_iter,
                n_trees,
            } => {
                let cfg = BorutaConfig {
                    forest: ForestParams {
                        n_trees: *n_trees,
                        ..ForestParams::random_forest()
                    },
                    alpha: *alpha,
                    max_iter: *max_iter,
                    seed: self.seed,
                };
                let v = feature_select::boruta(&train.x, &train.labels, &cfg)
                    .map_err(|e| stage_error(kind, e))?;
                // Confirmed features; tentative ones join only if nothing is
                // confirmed; everything is kept if both sets are empty.
                let mut keep = v.confirmed();
                if keep.is_empty() {
                    keep = v.indices(Status::Tentative);
                }
                if keep.is_empty() {
                    keep = (0..train.n_cols()).collect();
                }
                let names = train.column_names();
                let details = serde_json::json!({
                    "iterations_run": v.iterations_run,
                    "status": names.iter().cloned().zip(v.status.iter().copied())
                        .collect::<BTreeMap<String, Status>>(),
                    "hits": names.into_iter().zip(v.hit_counts.iter().copied())
                        .collect::<BTreeMap<String, usize>>(),
                });
                Ok(selection(train, keep, "boruta_select", details))
            }
            StageParams::Lda {
                components,
                epsilon,
            } => {
                let present = train.class_counts().iter().filter(|&&c| c > 0).count();
                let m = (*components)
                    .min(present.saturating_sub(1))
                    .min(train.n_cols());
                let proj = reduce::lda_fit(&train.x, &train.labels, m, *epsilon)
                    .map_err(|e| stage_error(kind, e))?;
                let out = DataTable::new(
                    named_columns("lda", m),
                    proj.transform(&train.x).map_err(|e| stage_error(kind, e))?,
                    train.labels.clone(),
                );
                Ok((out, Box::new(FittedLda(proj))))
            }
            StageParams::Autoencoder {
                latent_dim,
                hidden,
                epochs,
                learning_rate,
                batch_size,
            } => {
                let d = train.n_cols();
                if d < 2 {
                    return Err(stage_error(
                        kind,
                        "autoencoder needs at least two input columns",
                    ));
                }
                let cfg = AutoencoderConfig {
                    latent_dim: (*latent_dim).min(d - 1),
                    hidden_dims: hidden.clone(),
                    epochs: *epochs,
                    learning_rate: *learning_rate,
                    batch_size: *batch_size,
                    seed: self.seed,
                };
                let ae = reduce::ae_fit(&train.x, &cfg).map_err(|e| stage_error(kind, e))?;
                let z = ae.encode(&train.x).map_err(|e| stage_error(kind, e))?;
                let out =
                    DataTable::new(named_columns("latent", z.cols()), z, train.labels.clone());
                Ok((out, Box::new(FittedAutoencoder(ae))))
            }
        }
    }
}

fn selection(
    train: &DataTable,
    keep: Vec<usize>,
    stage: &str,
    details: Value,
) -> (DataTable, Box<dyn FittedStage>) {
    let out = train.select_columns(&keep);
    let fitted = FittedSelect {
        stage: stage.to_string(),
        names: out.column_names(),
        input_width: train.n_cols(),
        keep,
        details,
    };
    (out, Box::new(fitted))
}

fn check_width(expected: usize, x: &Matrix) -> Result<(), PipelineError> {
    if x.cols() != expected {
        return Err(PipelineError::InvalidSpec(format!(
            "expected {expected} input columns, found {}",
            x.cols()
        )));
    }
    Ok(())
}

#[derive(Debug)]
struct FittedRobust(RobustScalerParams);

impl FittedStage for FittedRobust {
    fn transform(&self, x: &Matrix) -> Result<Matrix, PipelineError> {
        check_width(self.0.median.len(), x)?;
        Ok(robust_apply(&self.0, x))
    }

    fn summary(&self) -> StageSummary {
        StageSummary::named("robust_scaler")
    }
}

#[derive(Debug)]
struct FittedMinMax(MinMaxParams);

impl FittedStage for FittedMinMax {
    fn transform(&self, x: &Matrix) -> Result<Matrix, PipelineError> {
        check_width(self.0.min.len(), x)?;
        Ok(minmax_apply(&self.0, x))
    }

    fn summary(&self) -> StageSummary {
        StageSummary::named("minmax_scaler")
    }
}

/// Resamplers touch training rows only; unseen rows pass through.
#[derive(Debug)]
struct FittedResampler(ResampleReport);

impl FittedStage for FittedResampler {
    fn transform(&self, x: &Matrix) -> Result<Matrix, PipelineError> {
        Ok(x.clone())
    }

    fn summary(&self) -> StageSummary {
        StageSummary {
            resample: Some(self.0.clone()),
            ..StageSummary::named("smote_tomek")
        }
    }
}

#[derive(Debug)]
struct FittedSelect {
    stage: String,
    names: Vec<String>,
    input_width: usize,
    keep: Vec<usize>,
    details: Value,
}

impl FittedStage for FittedSelect {
    fn transform(&self, x: &Matrix) -> Result<Matrix, PipelineError> {
        check_width(self.input_width, x)?;
        Ok(x.select_columns(&self.keep))
    }

    fn summary(&self) -> StageSummary {
        StageSummary {
            selected: Some(self.names.clone()),
            details: self.details.clone(),
            ..StageSummary::named(&self.stage)
        }
    }
}

#[derive(Debug)]
struct FittedLda(LdaProjection);

impl FittedStage for FittedLda {
    fn transform(&self, x: &Matrix) -> Result<Matrix, PipelineError> {
        self.0
            .transform(x)
            .map_err(|e| stage_error(StageKind::Lda, e))
    }

    fn summary(&self) -> StageSummary {
        StageSummary {
            details: serde_json::json!({
                "components": self.0.projection.cols(),
                "eigenvalues": self.0.eigenvalues,
                "epsilon": self.0.epsilon,
            }),
            ..StageSummary::named("lda")
        }
    }
}

#[derive(Debug)]
struct FittedAutoencoder(Autoencoder);

impl FittedStage for FittedAutoencoder {
    fn transform(&self, x: &Matrix) -> Result<Matrix, PipelineError> {
        self.0
            .encode(x)
            .map_err(|e| stage_error(StageKind::Autoencoder, e))
    }

    fn summary(&self) -> StageSummary {
        StageSummary {
            details: serde_json::json!({
                "latent_dim": self.0.latent_dim(),
                "first_epoch_loss": self.0.loss_trace.first(),
                "final_epoch_loss": self.0.loss_trace.last(),
            }),
            ..StageSummary::named("autoencoder")
        }
    }
}
