//! The experiment grids: baselines, the two pipelines and their ablations.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::stage::{StageKind, StageSpec};
use super::{PipelineError, PipelineSpec};
use crate::models::{ClassifierSpec, Family};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Baseline,
    Pipeline1,
    Pipeline2,
    Ablation1,
    Ablation2,
}

impl Target {
    pub const ALL: [Target; 5] = [
        Self::Baseline,
        Self::Pipeline1,
        Self::Pipeline2,
        Self::Ablation1,
        Self::Ablation2,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Self::Baseline => "baseline",
            Self::Pipeline1 => "pipeline1",
            Self::Pipeline2 => "pipeline2",
            Self::Ablation1 => "ablation1",
            Self::Ablation2 => "ablation2",
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Target {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|t| t.key() == s.trim())
            .ok_or_else(|| PipelineError::InvalidSpec(format!("unknown target `{s}`")))
    }
}

fn short(family: Family) -> &'static str {
    match family {
        Family::Logreg => "LogReg",
        Family::Knn => "KNN",
        Family::Dtree => "DTree",
        Family::Rforest => "RForest",
        Family::Etrees => "ETrees",
        Family::Gboost => "GBoost",
        Family::Adaboost => "AdaBoost",
        Family::Mlp => "MLP",
    }
}

fn stages(kinds: &[StageKind]) -> Vec<StageSpec> {
    kinds.iter().map(|&k| StageSpec::new(k)).collect()
}

fn row(prefix: &str, family: Family, kinds: &[StageKind], proxy: Option<&str>) -> PipelineSpec {
    let name = match proxy {
        Some(p) => format!("{prefix}-{p}"),
        None => format!("{prefix}-{}", short(family)),
    };
    let mut spec = PipelineSpec::new(&name, stages(kinds), ClassifierSpec::new(family));
    spec.proxy_for = proxy.map(str::to_string);
    spec
}

/// A results-table row whose configuration column reads `label`.
fn labeled(
    prefix: &str,
    family: Family,
    kinds: &[StageKind],
    proxy: Option<&str>,
    label: &str,
) -> PipelineSpec {
    let mut spec = row(prefix, family, kinds, proxy);
    spec.configuration = label.to_string();
    spec
}

/// Rows of the pipeline-1 results table. Configurations are taken as
/// listed; a resampler is placed ahead of any selector.
fn pipeline1() -> Vec<PipelineSpec> {
    use StageKind::*;
    vec![
        labeled(
            "P1",
            Family::Logreg,
            &[RobustScaler, SmoteTomek],
            None,
            "RobustScaler + SMOTETomek",
        ),
        labeled(
            "P1",
            Family::Knn,
            &[SmoteTomek, MiSelect],
            None,
            "MI + SMOTETomek",
        ),
        row("P1", Family::Rforest, &[Lda], None),
        labeled(
            "P1",
            Family::Gboost,
            &[SmoteTomek, MiSelect],
            Some("XGBoost"),
            "MI + SMOTETomek",
        ),
        row("P1", Family::Gboost, &[RobustScaler], None),
        row("P1", Family::Etrees, &[RobustScaler], None),
        row("P1", Family::Adaboost, &[MiSelect], None),
        row("P1", Family::Mlp, &[MiSelect], None),
        labeled(
            "P1",
            Family::Gboost,
            &[SmoteTomek, MiSelect],
            Some("LightGBM"),
            "MI + SMOTETomek",
        ),
    ]
}

/// Rows of the pipeline-2 results table. Every row starts with min-max
/// scaling, which the autoencoder requires and Boruta ignores.
fn pipeline2() -> Vec<PipelineSpec> {
    use StageKind::*;
    vec![
        row("P2", Family::Logreg, &[MinmaxScaler], None),
        labeled(
            "P2",
            Family::Knn,
            &[MinmaxScaler, Autoencoder],
            None,
            "Autoencoder",
        ),
        row("P2", Family::Rforest, &[MinmaxScaler, SmoteTomek], None),
        row(
            "P2",
            Family::Gboost,
            &[MinmaxScaler, SmoteTomek],
            Some("XGBoost"),
        ),
        labeled(
            "P2",
            Family::Gboost,
            &[MinmaxScaler, BorutaSelect],
            None,
            "Boruta",
        ),
        labeled(
            "P2",
            Family::Etrees,
            &[MinmaxScaler, SmoteTomek, BorutaSelect],
            None,
            "Boruta + SMOTETomek",
        ),
        labeled(
            "P2",
            Family::Adaboost,
            &[MinmaxScaler, Autoencoder],
            None,
            "Autoencoder",
        ),
        labeled(
            "P2",
            Family::Mlp,
            &[MinmaxScaler, SmoteTomek, Autoencoder],
            None,
            "Autoencoder + SMOTETomek",
        ),
        row("P2", Family::Gboost, &[MinmaxScaler], Some("LightGBM")),
    ]
}

fn ablation(prefix: &str, family: Family, grid: &[&[StageKind]]) -> Vec<PipelineSpec> {
    grid.iter()
        .map(|kinds| {
            let label = super::describe(&stages(kinds));
            let name = format!("{prefix}-{}", label.replace(" + ", "+"));
            PipelineSpec::new(&name, stages(kinds), ClassifierSpec::new(family))
        })
        .collect()
}

pub fn target_specs(target: Target) -> Vec<PipelineSpec> {
    use StageKind::*;
    match target {
        Target::Baseline => Family::ALL
            .into_iter()
            .map(|f| row("Base", f, &[], None))
            .collect(),
        Target::Pipeline1 => pipeline1(),
        Target::Pipeline2 => pipeline2(),
        Target::Ablation1 => ablation(
            "A1",
            Family::Knn,
            &[
                &[],
                &[RobustScaler],
                &[SmoteTomek, RobustScaler],
                &[RobustScaler, MiSelect],
                &[SmoteTomek, RobustScaler, MiSelect],
                &[RobustScaler, MiSelect, Lda],
                &[SmoteTomek, RobustScaler, MiSelect, Lda],
            ],
        ),
        Target::Ablation2 => ablation(
            "A2",
            Family::Etrees,
            &[
                &[],
                &[MinmaxScaler],
                &[SmoteTomek, MinmaxScaler],
                &[MinmaxScaler, BorutaSelect],
                &[SmoteTomek, MinmaxScaler, BorutaSelect],
                &[MinmaxScaler, BorutaSelect, Autoencoder],
                &[SmoteTomek, MinmaxScaler, BorutaSelect, Autoencoder],
            ],
        ),
    }
}

/// Every canonical spec, grouped by target in declaration order.
pub fn canonical_specs() -> Vec<PipelineSpec> {
    Target::ALL.into_iter().flat_map(target_specs).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn find(name: &str) -> PipelineSpec {
        canonical_specs()
            .into_iter()
            .find(|s| s.name == name)
            .unwrap()
    }

    #[test]
    fn grid_sizes_and_names() {
        assert_eq!(target_specs(Target::Baseline).len(), 8);
        assert_eq!(target_specs(Target::Pipeline1).len(), 9);
        assert_eq!(target_specs(Target::Pipeline2).len(), 9);
        for t in [Target::Ablation1, Target::Ablation2] {
            let specs = target_specs(t);
            assert_eq!(specs.len(), 7);
            let mut names: Vec<_> = specs.iter().map(|s| s.name.clone()).collect();
            names.sort();
            names.dedup();
            assert_eq!(names.len(), 7);
        }
        for s in canonical_specs() {
            s.validate().unwrap();
        }
    }

    #[test]
    fn tabulated_rows() {
        use StageKind::*;
        let kinds = |s: &PipelineSpec| s.stages.iter().map(|x| x.kind).collect::<Vec<_>>();
        let p1 = find("P1-KNN");
        assert_eq!(kinds(&p1), vec![SmoteTomek, MiSelect]);
        assert_eq!(p1.classifier.family, Family::Knn);
        let p2 = find("P2-ETrees");
        assert_eq!(kinds(&p2), vec![MinmaxScaler, SmoteTomek, BorutaSelect]);
        let a1 = find("A1-SMOTETomek+RobustScaler+MI+LDA");
        assert_eq!(kinds(&a1), vec![SmoteTomek, RobustScaler, MiSelect, Lda]);
        let a2 = find("A2-MinMaxScaler");
        assert_eq!(kinds(&a2), vec![MinmaxScaler]);
        assert_eq!(a2.classifier.family, Family::Etrees);
        assert_eq!(find("P1-XGBoost").proxy_for.as_deref(), Some("XGBoost"));
        assert_eq!(p1.configuration, "MI + SMOTETomek");
        assert_eq!(p2.configuration, "Boruta + SMOTETomek");
        assert_eq!(
            find("P2-RForest").configuration,
            "MinMaxScaler + SMOTETomek"
        );
        assert_eq!(a1.configuration, "SMOTETomek + RobustScaler + MI + LDA");
    }
}
