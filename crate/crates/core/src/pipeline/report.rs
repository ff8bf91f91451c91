//! Rendering experiment reports as JSON, CSV and Markdown tables.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ExperimentReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
    Md,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Self::Json => "json",
            Self::Csv => "csv",
            Self::Md => "md",
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            "md" | "markdown" => Ok(Self::Md),
            other => Err(format!("unknown format `{other}`")),
        }
    }
}

/// One table row: median metrics of one spec over its seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub name: String,
    pub model: String,
    pub configuration: String,
    pub accuracy: f64,
    pub f1: f64,
    pub recall: f64,
    pub precision: f64,
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cv_mean_accuracy: Option<f64>,
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Collapses reports of the same spec run under several seeds.
pub fn summarize(runs: &[ExperimentReport]) -> SummaryRow {
    let first = &runs[0];
    let pick = |f: fn(&ExperimentReport) -> f64| median(&runs.iter().map(f).collect::<Vec<_>>());
    let cv: Vec<f64> = runs
        .iter()
        .filter(|r| !r.fold_accuracies.is_empty())
        .map(|r| r.fold_accuracies.iter().sum::<f64>() / r.fold_accuracies.len() as f64)
        .collect();
    SummaryRow {
        name: first.name.clone(),
        model: first.display_model(),
        configuration: first.configuration.clone(),
        accuracy: pick(|r| r.test.accuracy),
        f1: pick(|r| r.test.f1),
        recall: pick(|r| r.test.recall),
        precision: pick(|r| r.test.precision),
        seeds: runs.iter().map(|r| r.seed).collect(),
        cv_mean_accuracy: (!cv.is_empty()).then(|| median(&cv)),
    }
}

fn pct(v: f64) -> String {
    format!("{:.3}%", v * 100.0)
}

fn seeds_text(seeds: &[u64]) -> String {
    seeds
        .iter()
        .map(u64::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

pub fn summary_markdown(title: &str, rows: &[SummaryRow]) -> String {
    let mut out = String::new();
    let seeds = rows
        .first()
        .map(|r| seeds_text(&r.seeds))
        .unwrap_or_default();
    let _ = writeln!(out, "# {title}\n");
    let _ = writeln!(
        out,
        "<!-- seeds: {seeds}; metrics are medians over seeds -->\n"
    );
    out.push_str("| Model | Configuration | Accuracy | F1 | Recall | Precision |\n");
    out.push_str("|---|---|---|---|---|---|\n");
    for r in rows {
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} | {} |",
            r.model,
            r.configuration,
            pct(r.accuracy),
            pct(r.f1),
            pct(r.recall),
            pct(r.precision)
        );
    }
    out
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "name",
        "model",
        "configuration",
        "accuracy",
        "f1",
        "recall",
        "precision",
        "seeds",
    ])
    .expect("in-memory write");
    for r in rows {
        w.write_record([
            r.name.clone(),
            r.model.clone(),
            r.configuration.clone(),
            r.accuracy.to_string(),
            r.f1.to_string(),
            r.recall.to_string(),
            r.precision.to_string(),
            seeds_text(&r.seeds),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

pub fn summary_json(rows: &[SummaryRow]) -> String {
    serde_json::to_string_pretty(rows).expect("rows serialize")
}

pub fn render_summary(title: &str, rows: &[SummaryRow], format: Format) -> String {
    match format {
        Format::Json => summary_json(rows),
        Format::Csv => summary_csv(rows),
        Format::Md => summary_markdown(title, rows),
    }
}

/// Reports of one spec across seeds. Every format embeds the resolved spec
/// and seeds.
pub fn render_runs(runs: &[ExperimentReport], format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(runs).expect("reports serialize"),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record([
                "name",
                "model",
                "configuration",
                "seed",
                "accuracy",
                "f1",
                "recall",
                "precision",
                "cv_fold_accuracies",
                "spec",
            ])
            .expect("in-memory write");
            for r in runs {
                let folds: Vec<String> = r.fold_accuracies.iter().map(f64::to_string).collect();
                w.write_record([
                    r.name.clone(),
                    r.display_model(),
                    r.configuration.clone(),
                    r.seed.to_string(),
                    r.test.accuracy.to_string(),
                    r.test.f1.to_string(),
                    r.test.recall.to_string(),
                    r.test.precision.to_string(),
                    folds.join(";"),
                    serde_json::to_string(&r.spec).expect("spec serializes"),
                ])
                .expect("in-memory write");
            }
            String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
        }
        Format::Md => {
            let mut out = String::new();
            let first = &runs[0];
            let _ = writeln!(out, "# {}\n", first.name);
            let _ = writeln!(
                out,
                "{} with {}\n",
                first.display_model(),
                first.configuration
            );
            out.push_str("| Seed | Accuracy | F1 | Recall | Precision | CV mean accuracy |\n");
            out.push_str("|---|---|---|---|---|---|\n");
            for r in runs {
                let cv = if r.fold_accuracies.is_empty() {
                    "-".to_string()
                } else {
                    pct(r.fold_accuracies.iter().sum::<f64>() / r.fold_accuracies.len() as f64)
                };
                let _ = writeln!(
                    out,
                    "| {} | {} | {} | {} | {} | {} |",
                    r.seed,
                    pct(r.test.accuracy),
                    pct(r.test.f1),
                    pct(r.test.recall),
                    pct(r.test.precision),
                    cv
                );
            }
            let _ = writeln!(out, "\nResolved configuration:\n");
            let _ = writeln!(
                out,
                "```json\n{}\n```",
                serde_json::to_string_pretty(&first.spec).expect("spec serializes")
            );
            out
        }
    }
}

/// Timing table: model, configuration, training seconds, testing ms
/// (medians over the runs of each spec).
pub fn render_timing(groups: &[Vec<ExperimentReport>], format: Format) -> String {
    let rows: Vec<(String, String, f64, f64)> = groups
        .iter()
        .filter(|g| !g.is_empty())
        .map(|g| {
            let t: Vec<_> = g.iter().filter_map(|r| r.timing.clone()).collect();
            (
                g[0].display_model(),
                g[0].configuration.clone(),
                median(&t.iter().map(|x| x.train_seconds).collect::<Vec<_>>()),
                median(&t.iter().map(|x| x.test_ms_total).collect::<Vec<_>>()),
            )
        })
        .collect();
    match format {
        Format::Json => serde_json::to_string_pretty(
            &rows
                .iter()
                .map(|(m, c, tr, te)| {
                    serde_json::json!({
                        "model": m, "configuration": c,
                        "train_seconds": tr, "test_ms": te,
                    })
                })
                .collect::<Vec<_>>(),
        )
        .expect("timing serializes"),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["model", "configuration", "train_seconds", "test_ms"])
                .expect("in-memory write");
            for (m, c, tr, te) in &rows {
                w.write_record([m.clone(), c.clone(), tr.to_string(), te.to_string()])
                    .expect("in-memory write");
            }
            String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
        }
        Format::Md => {
            let mut out = String::from(
                "| Model | Configuration | Training Time (s) | Testing Time (ms) |\n|---|---|---|---|\n",
            );
            for (m, c, tr, te) in &rows {
                let _ = writeln!(out, "| {m} | {c} | {tr:.3} | {te:.3} |");
            }
            out
        }
    }
}
