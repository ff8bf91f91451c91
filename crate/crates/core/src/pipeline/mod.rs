//! Stage chains plus a classifier, experiment runs and the canonical grids.

pub mod canonical;
pub mod config;
pub mod report;
pub mod stage;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{DataTable, DatasetError};
use crate::eval::{
    self, cross_validate, randomized_search, stratified_kfold, timed_fit_predict, Alternative,
    Averaging, ConfusionMatrix, EvalError, FoldPlan, Learner, MetricsReport, SearchResult,
    TimingRecord, WilcoxonResult,
};
use crate::matrix::Matrix;
use crate::models::{self, ClassifierSpec, FittedModel, ModelError};
use crate::rng;

pub use canonical::{canonical_specs, target_specs, Target};
pub use stage::{BuiltinStage, FittedStage, Stage, StageKind, StageSpec, StageSummary};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error("invalid pipeline: {0}")]
    InvalidSpec(String),
    #[error("stage {kind} failed: {message}")]
    Stage { kind: StageKind, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("reports were not produced over the same fold plan")]
    FoldPlanMismatch,
}

/// Declarative pipeline: ordered stages followed by a classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineSpec {
    pub name: String,
    /// Human-readable stage list such as "MI + SMOTETomek".
    #[serde(default)]
    pub configuration: String,
    #[serde(default)]
    pub stages: Vec<StageSpec>,
    pub classifier: ClassifierSpec,
    /// Set when the classifier stands in for a model family not built here.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proxy_for: Option<String>,
}

impl PipelineSpec {
    pub fn new(name: &str, stages: Vec<StageSpec>, classifier: ClassifierSpec) -> Self {
        let configuration = describe(&stages);
        Self {
            name: name.to_string(),
            configuration,
            stages,
            classifier,
            proxy_for: None,
        }
    }

    /// At most one scaler and one resampler; a resampler may not follow a
    /// selector or reducer; parameters must parse.
    pub fn validate(&self) -> Result<(), PipelineError> {
        let kinds: Vec<StageKind> = self.stages.iter().map(|s| s.kind).collect();
        if kinds.iter().filter(|k| k.is_scaler()).count() > 1 {
            return Err(PipelineError::InvalidSpec(format!(
                "{}: more than one scaler",
                self.name
            )));
        }
        if kinds.iter().filter(|k| k.is_resampler()).count() > 1 {
            return Err(PipelineError::InvalidSpec(format!(
                "{}: more than one resampler",
                self.name
            )));
        }
        if let Some(r) = kinds.iter().position(|k| k.is_resampler()) {
            if kinds[..r].iter().any(|k| k.is_selector_or_reducer()) {
                return Err(PipelineError::InvalidSpec(format!(
                    "{}: resampler must precede selectors and reducers",
                    self.name
                )));
            }
        }
        for s in &self.stages {
            s.resolved()?;
        }
        self.classifier.validate()?;
        Ok(())
    }

    /// Copy with every stage and classifier default written out.
    pub fn resolved(&self) -> Result<PipelineSpec, PipelineError> {
        self.validate()?;
        Ok(PipelineSpec {
            stages: self
                .stages
                .iter()
                .map(StageSpec::resolved)
                .collect::<Result<_, _>>()?,
            classifier: self.classifier.resolved()?,
            ..self.clone()
        })
    }

    /// Runtime pipeline whose stage `i` is seeded from `(seed, i + 1)` and
    /// whose classifier is seeded with `seed`.
    pub fn build(&self, seed: u64) -> Result<Pipeline, PipelineError> {
        self.validate()?;
        let stages = self
            .stages
            .iter()
            .enumerate()
            .map(|(i, s)| {
                BuiltinStage::new(s, rng::derive_seed(seed, i as u64 + 1))
                    .map(|b| Box::new(b) as Box<dyn Stage>)
            })
            .collect::<Result<_, _>>()?;
        Ok(Pipeline {
            stages,
            classifier: self.classifier.clone().with_seed(seed),
        })
    }
}

/// "Baseline" for no stages, otherwise stage labels joined by " + ".
pub fn describe(stages: &[StageSpec]) -> String {
    if stages.is_empty() {
        return "Baseline".into();
    }
    stages
        .iter()
        .map(|s| s.kind.label())
        .collect::<Vec<_>>()
        .join(" + ")
}

/// Runnable chain. Custom [`Stage`] implementations may be mixed in.
#[derive(Debug)]
pub struct Pipeline {
    pub stages: Vec<Box<dyn Stage>>,
    pub classifier: ClassifierSpec,
}

#[derive(Debug)]
pub struct FittedPipeline {
    pub stages: Vec<Box<dyn FittedStage>>,
    pub model: FittedModel,
    /// Training table as seen by the classifier.
    pub train_rows: usize,
    pub train_columns: Vec<String>,
}

impl FittedPipeline {
    pub fn summaries(&self) -> Vec<StageSummary> {
        self.stages.iter().map(|s| s.summary()).collect()
    }
}

impl Learner for Pipeline {
    type Model = FittedPipeline;
    type Error = PipelineError;

    fn fit(&self, train: &DataTable) -> Result<FittedPipeline, PipelineError> {
        let mut table = train.clone();
        let mut fitted = Vec::with_capacity(self.stages.len());
        for stage in &self.stages {
            let (next, f) = stage.fit(&table)?;
            table = next;
            fitted.push(f);
        }
        let model = models::fit(&self.classifier, &table.x, &table.labels)?;
        Ok(FittedPipeline {
            stages: fitted,
            model,
            train_rows: table.n_rows(),
            train_columns: table.column_names(),
        })
    }

    fn predict(&self, model: &FittedPipeline, x: &Matrix) -> Result<Vec<usize>, PipelineError> {
        let mut z = x.clone();
        for s in &model.stages {
            z = s.transform(&z)?;
        }
        Ok(model.model.predict(&z)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOptions {
    /// Cross-validation folds on the training split; 0 skips CV.
    pub cv_folds: usize,
    /// Randomized-search draws over the family's default space; 0 keeps
    /// the spec's hyperparameters.
    pub search_iter: usize,
    pub averaging: Averaging,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        Self {
            cv_folds: 8,
            search_iter: 0,
            averaging: Averaging::Macro,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub configuration: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proxy_for: Option<String>,
    /// Resolved spec actually run, defaults included.
    pub spec: PipelineSpec,
    pub seed: u64,
    pub options: ExperimentOptions,
    pub train_rows: usize,
    pub test_rows: usize,
    pub classifier_train_rows: usize,
    pub classifier_columns: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fold_plan: Option<FoldPlan>,
    pub fold_metrics: Vec<MetricsReport>,
    pub fold_accuracies: Vec<f64>,
    pub test: MetricsReport,
    pub confusion: ConfusionMatrix,
    pub stages: Vec<StageSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchResult>,
    /// Wall-clock timings; omitted from reproducible outputs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<TimingRecord>,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Copy without wall-clock data, identical across reruns.
    pub fn without_timing(&self) -> Self {
        Self {
            timing: None,
            ..self.clone()
        }
    }

    pub fn display_model(&self) -> String {
        let base = self.spec.classifier.family.display_name();
        match &self.proxy_for {
            Some(p) => format!("{p} (gboost proxy)"),
            None => base.to_string(),
        }
    }
}

/// Fits on `train`, scores on `test`, and (unless disabled) records a
/// stratified CV trace over `train` with the fold plan seeded by `seed`.
/// With `search_iter > 0` the classifier's hyperparameters are chosen by
/// randomized search on that plan first.
pub fn run_experiment(
    spec: &PipelineSpec,
    train: &DataTable,
    test: &DataTable,
    seed: u64,
    options: &ExperimentOptions,
) -> Result<ExperimentReport, PipelineError> {
    let mut spec = spec.resolved()?;
    let plan = if options.cv_folds > 0 {
        Some(stratified_kfold(&train.labels, options.cv_folds, seed)?)
    } else {
        None
    };
    let mut search = None;
    let mut fold_metrics = Vec::new();
    if let Some(plan) = &plan {
        if options.search_iter > 0 {
            let space = eval::default_search_space(spec.classifier.family);
            let base = spec.clone();
            let result = randomized_search(
                &spec.classifier,
                &space,
                options.search_iter,
                train,
                plan,
                seed,
                |c: &ClassifierSpec| {
                    let mut s = base.clone();
                    s.classifier = c.clone();
                    s.build(seed).expect("validated spec builds")
                },
            )?;
            spec.classifier = result.best.resolved()?;
            search = Some(result);
        }
        let folds = cross_validate(&spec.build(seed)?, train, plan, options.averaging)?;
        fold_metrics = folds.into_iter().map(|f| f.metrics).collect();
    }
    let pipeline = spec.build(seed)?;
    let run = timed_fit_predict(&pipeline, train, test, options.averaging)?;
    Ok(ExperimentReport {
        name: spec.name.clone(),
        configuration: spec.configuration.clone(),
        proxy_for: spec.proxy_for.clone(),
        seed,
        options: options.clone(),
        train_rows: train.n_rows(),
        test_rows: test.n_rows(),
        classifier_train_rows: run.model.train_rows,
        classifier_columns: run.model.train_columns.clone(),
        fold_plan: plan,
        fold_accuracies: fold_metrics.iter().map(|m| m.accuracy).collect(),
        fold_metrics,
        test: run.metrics,
        confusion: run.confusion,
        stages: run.model.summaries(),
        search,
        timing: Some(run.timing),
        spec,
    })
}

/// Runs the seven-row ablation grid of pipeline 1 (KNN) or 2 (Extra Trees).
pub fn run_ablation(
    pipeline_id: u8,
    train: &DataTable,
    test: &DataTable,
    seed: u64,
    options: &ExperimentOptions,
) -> Result<Vec<ExperimentReport>, PipelineError> {
    let target = match pipeline_id {
        1 => Target::Ablation1,
        2 => Target::Ablation2,
        other => {
            return Err(PipelineError::InvalidSpec(format!(
                "no ablation grid for pipeline {other}"
            )))
        }
    };
    target_specs(target)
        .iter()
        .map(|s| run_experiment(s, train, test, seed, options))
        .collect()
}

/// Pairs the fold accuracies of two reports produced over one fold plan.
pub fn compare_with_wilcoxon(
    a: &ExperimentReport,
    b: &ExperimentReport,
    alternative: Alternative,
) -> Result<WilcoxonResult, PipelineError> {
    match (&a.fold_plan, &b.fold_plan) {
        (Some(pa), Some(pb)) if pa == pb && a.fold_accuracies.len() == b.fold_accuracies.len() => {}
        _ => return Err(PipelineError::FoldPlanMismatch),
    }
    Ok(eval::wilcoxon(
        &a.fold_accuracies,
        &b.fold_accuracies,
        alternative,
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Family;

    fn spec(stages: &[StageKind]) -> PipelineSpec {
        PipelineSpec::new(
            "t",
            stages.iter().map(|&k| StageSpec::new(k)).collect(),
            ClassifierSpec::new(Family::Knn),
        )
    }

    #[test]
    fn order_rules() {
        use StageKind::*;
        assert!(spec(&[SmoteTomek, RobustScaler, MiSelect, Lda])
            .validate()
            .is_ok());
        assert!(spec(&[MinmaxScaler, SmoteTomek, BorutaSelect])
            .validate()
            .is_ok());
        assert!(spec(&[MiSelect, SmoteTomek]).validate().is_err());
        assert!(spec(&[RobustScaler, MinmaxScaler]).validate().is_err());
        assert!(spec(&[SmoteTomek, SmoteTomek]).validate().is_err());
    }

    #[test]
    fn describe_joins_labels() {
        use StageKind::*;
        assert_eq!(spec(&[]).configuration, "Baseline");
        assert_eq!(
            spec(&[SmoteTomek, RobustScaler, MiSelect, Lda]).configuration,
            "SMOTETomek + RobustScaler + MI + LDA"
        );
    }

    #[test]
    fn resolved_is_idempotent() {
        let s = spec(&[StageKind::SmoteTomek, StageKind::MiSelect])
            .resolved()
            .unwrap();
        assert_eq!(s.resolved().unwrap(), s);
        assert_eq!(s.stages[0].parameters["k"], serde_json::json!(5));
        assert_eq!(s.classifier.hyperparameters["k"], serde_json::json!(5));
    }
}
