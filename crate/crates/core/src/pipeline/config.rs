//! Plain-text experiment configuration.
//!
//! ```text
//! # comments start with '#'
//! [experiment]
//! seeds = 1, 2, 3
//! cv_folds = 8
//! search_iter = 0
//! averaging = macro
//! data = data/sleep.csv
//!
//! [pipeline P1-KNN-k7]
//! configuration = MI + SMOTETomek
//! classifier = knn
//! classifier.k = 7
//! stage = smote_tomek k=5 policy=both
//! stage = mi_select mode=histogram bins=10
//! ```
//!
//! Values are read as JSON when they parse (numbers, booleans, `null`,
//! `[16,8]`) and as bare strings otherwise. A stage line is a kind followed
//! by `name=value` tokens without inner spaces.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use super::stage::{StageKind, StageSpec};
use super::{describe, ExperimentOptions, PipelineSpec};
use crate::eval::Averaging;
use crate::models::{ClassifierSpec, Family};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("config line {line}: {message}")]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub seeds: Option<Vec<u64>>,
    pub data: Option<String>,
    pub options: ExperimentOptions,
    pub pipelines: Vec<PipelineSpec>,
}

fn value(text: &str) -> Value {
    serde_json::from_str(text).unwrap_or_else(|_| Value::String(text.to_string()))
}

enum Section {
    None,
    Experiment,
    Pipeline(PipelineDraft),
}

struct PipelineDraft {
    line: usize,
    name: String,
    configuration: Option<String>,
    classifier: Option<ClassifierSpec>,
    stages: Vec<StageSpec>,
}

impl PipelineDraft {
    fn finish(self) -> Result<PipelineSpec, ConfigError> {
        let err = |message: String| ConfigError {
            line: self.line,
            message,
        };
        let classifier = self
            .classifier
            .ok_or_else(|| err(format!("pipeline `{}` has no classifier", self.name)))?;
        let configuration = self.configuration.unwrap_or_else(|| describe(&self.stages));
        let spec = PipelineSpec {
            name: self.name,
            configuration,
            stages: self.stages,
            classifier,
            proxy_for: None,
        };
        spec.validate().map_err(|e| err(e.to_string()))?;
        Ok(spec)
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = ExperimentConfig::default();
    let mut section = Section::None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let err = |message: String| ConfigError {
            line: line_no,
            message,
        };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(header) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            if let Section::Pipeline(d) = std::mem::replace(&mut section, Section::None) {
                cfg.pipelines.push(d.finish()?);
            }
            let mut parts = header.split_whitespace();
            section = match (parts.next(), parts.next(), parts.next()) {
                (Some("experiment"), None, _) => Section::Experiment,
                (Some("pipeline"), Some(name), None) => Section::Pipeline(PipelineDraft {
                    line: line_no,
                    name: name.to_string(),
                    configuration: None,
                    classifier: None,
                    stages: Vec::new(),
                }),
                _ => return Err(err(format!("unknown section `[{header}]`"))),
            };
            continue;
        }
        let (key, val) = line
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| err("expected `key = value`".into()))?;
        match &mut section {
            Section::None => return Err(err("setting outside a section".into())),
            Section::Experiment => match key {
                "seed" => {
                    let s = val.parse().map_err(|_| err(format!("bad seed `{val}`")))?;
                    cfg.seeds = Some(vec![s]);
                }
                "seeds" => {
                    let seeds = val
                        .split(',')
                        .map(|s| s.trim().parse::<u64>())
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|_| err(format!("bad seed list `{val}`")))?;
                    cfg.seeds = Some(seeds);
                }
                "cv_folds" => {
                    cfg.options.cv_folds = val.parse().map_err(|_| err("bad cv_folds".into()))?
                }
                "search_iter" => {
                    cfg.options.search_iter =
                        val.parse().map_err(|_| err("bad search_iter".into()))?
                }
                "averaging" => {
                    cfg.options.averaging = match val {
                        "macro" => Averaging::Macro,
                        "weighted" => Averaging::Weighted,
                        _ => return Err(err(format!("unknown averaging `{val}`"))),
                    }
                }
                "data" => cfg.data = Some(val.to_string()),
                _ => return Err(err(format!("unknown experiment key `{key}`"))),
            },
            Section::Pipeline(d) => {
                if key == "configuration" {
                    d.configuration = Some(val.to_string());
                } else if key == "classifier" {
                    let family: Family = val.parse().map_err(|e| err(format!("{e}")))?;
                    d.classifier = Some(ClassifierSpec::new(family));
                } else if let Some(hp) = key.strip_prefix("classifier.") {
                    let c = d
                        .classifier
                        .as_mut()
                        .ok_or_else(|| err("`classifier` must precede its parameters".into()))?;
                    c.hyperparameters.insert(hp.to_string(), value(val));
                } else if key == "stage" {
                    let mut tokens = val.split_whitespace();
                    let kind: StageKind = tokens
                        .next()
                        .ok_or_else(|| err("empty stage".into()))?
                        .parse()
                        .map_err(|e| err(format!("{e}")))?;
                    let mut stage = StageSpec::new(kind);
                    for t in tokens {
                        let (k, v) = t
                            .split_once('=')
                            .ok_or_else(|| err(format!("expected name=value, got `{t}`")))?;
                        stage.parameters.insert(k.to_string(), value(v));
                    }
                    d.stages.push(stage);
                } else {
                    return Err(err(format!("unknown pipeline key `{key}`")));
                }
            }
        }
    }
    if let Section::Pipeline(d) = section {
        cfg.pipelines.push(d.finish()?);
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# sample
[experiment]
seeds = 1, 2,3
cv_folds = 5
averaging = weighted

[pipeline custom-knn]
classifier = knn
classifier.k = 7
stage = smote_tomek k=3 policy=majority_member
stage = mi_select mode=histogram bins=8   # trailing comment
";

    #[test]
    fn parses_sample() {
        let c = parse_config(SAMPLE).unwrap();
        assert_eq!(c.seeds, Some(vec![1, 2, 3]));
        assert_eq!(c.options.cv_folds, 5);
        assert_eq!(c.options.averaging, Averaging::Weighted);
        let p = &c.pipelines[0];
        assert_eq!(p.name, "custom-knn");
        assert_eq!(p.configuration, "SMOTETomek + MI");
        assert_eq!(p.classifier.hyperparameters["k"], serde_json::json!(7));
        assert_eq!(p.stages[1].parameters["bins"], serde_json::json!(8));
        assert_eq!(
            p.stages[0].parameters["policy"],
            serde_json::json!("majority_member")
        );
    }

    #[test]
    fn reports_line_numbers() {
        let e = parse_config("[experiment]\nseed = x\n").unwrap_err();
        assert_eq!(e.line, 2);
        let e = parse_config("[pipeline a]\nstage = mi_select\nstage = smote_tomek\n").unwrap_err();
        assert!(e.message.contains("no classifier"), "{}", e.message);
        let e = parse_config(
            "[pipeline a]\nclassifier = knn\nstage = mi_select\nstage = smote_tomek\n",
        )
        .unwrap_err();
        assert!(e.message.contains("resampler"), "{}", e.message);
        assert!(parse_config("k = 1").is_err());
    }
}
