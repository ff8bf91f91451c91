//! `sleepscreen`: validate the dataset, run experiment grids, compare runs.
//!
//! Exit codes: 0 success, 2 input or schema error, 3 experiment failure,
//! 4 statistics error.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use sleepscreen_core::dataset::{self, DataTable, EncodingSpec, SleepDisorder, CSV_COLUMNS};
use sleepscreen_core::eval::{Alternative, Averaging};
use sleepscreen_core::pipeline::config::{parse_config, ExperimentConfig};
use sleepscreen_core::pipeline::report::{self, Format};
use sleepscreen_core::pipeline::{
    compare_with_wilcoxon, run_experiment, target_specs, ExperimentReport, PipelineSpec, Target,
};

const EXIT_SCHEMA: u8 = 2;
const EXIT_EXPERIMENT: u8 = 3;
const EXIT_STATS: u8 = 4;
const TRAIN_FRACTION: f64 = 0.8;

#[derive(Parser)]
#[command(
    name = "sleepscreen",
    version,
    about = "Sleep-disorder screening experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a dataset file against the expected schema.
    Validate {
        /// CSV file (falls back to --data / SLEEPSCREEN_DATA).
        path: Option<PathBuf>,
        #[arg(long, env = "SLEEPSCREEN_DATA")]
        data: Option<PathBuf>,
    },
    /// Run an experiment grid and write reports.
    Run(RunArgs),
    /// Wilcoxon signed-rank test on the fold accuracies of two reports.
    Stats {
        report_a: PathBuf,
        report_b: PathBuf,
        #[arg(long, default_value = "greater")]
        alternative: String,
        /// Seed to pick when a report file holds several runs.
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RunTarget {
    Baseline,
    Pipeline1,
    Pipeline2,
    Ablation1,
    Ablation2,
    All,
    /// Only the pipelines defined in --config.
    Config,
}

#[derive(clap::Args)]
struct RunArgs {
    target: RunTarget,
    #[arg(long, env = "SLEEPSCREEN_DATA")]
    data: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated seeds; metrics are reported as medians.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long, default_value = "reports")]
    out: PathBuf,
    /// Comma-separated subset of json, csv, md.
    #[arg(long, value_delimiter = ',', default_value = "json,md")]
    format: Vec<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Cross-validation folds on the training split (0 disables).
    #[arg(long)]
    cv_folds: Option<usize>,
    /// Randomized-search draws per model (0 keeps defaults).
    #[arg(long)]
    search_iter: Option<usize>,
    #[arg(long)]
    weighted: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { path, data } => validate(path.or(data)),
        Command::Run(args) => run(args),
        Command::Stats {
            report_a,
            report_b,
            alternative,
            seed,
        } => stats(&report_a, &report_b, &alternative, seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

type CliResult = Result<(), (u8, String)>;

fn schema<E: std::fmt::Display>(e: E) -> (u8, String) {
    (EXIT_SCHEMA, e.to_string())
}

fn validate(path: Option<PathBuf>) -> CliResult {
    let path = path.ok_or_else(|| schema("no dataset path given"))?;
    let records = dataset::load_csv(&path).map_err(schema)?;
    let mut counts = BTreeMap::new();
    for r in &records {
        *counts.entry(r.sleep_disorder).or_insert(0usize) += 1;
    }
    let count = |c: SleepDisorder| counts.get(&c).copied().unwrap_or(0);
    println!(
        "{} rows; classes None={}, Sleep Apnea={}, Insomnia={}",
        records.len(),
        count(SleepDisorder::None),
        count(SleepDisorder::SleepApnea),
        count(SleepDisorder::Insomnia)
    );
    for c in CSV_COLUMNS {
        println!("  [ok] {c}");
    }
    let table = dataset::prepare(&path, &EncodingSpec::default()).map_err(schema)?;
    println!(
        "encoded: {} rows x {} features",
        table.n_rows(),
        table.n_cols()
    );
    Ok(())
}

fn load_config(path: Option<&Path>) -> Result<ExperimentConfig, (u8, String)> {
    match path {
        None => Ok(ExperimentConfig::default()),
        Some(p) => {
            let text =
                fs::read_to_string(p).map_err(|e| schema(format!("{}: {e}", p.display())))?;
            parse_config(&text).map_err(schema)
        }
    }
}

fn specs_for(target: RunTarget, config: &ExperimentConfig) -> Vec<(String, Vec<PipelineSpec>)> {
    let overrides: BTreeMap<&str, &PipelineSpec> = config
        .pipelines
        .iter()
        .map(|p| (p.name.as_str(), p))
        .collect();
    let canonical = |t: Target| {
        let specs = target_specs(t)
            .into_iter()
            .map(|s| overrides.get(s.name.as_str()).map_or(s, |o| (*o).clone()))
            .collect();
        (t.key().to_string(), specs)
    };
    match target {
        RunTarget::Baseline => vec![canonical(Target::Baseline)],
        RunTarget::Pipeline1 => vec![canonical(Target::Pipeline1)],
        RunTarget::Pipeline2 => vec![canonical(Target::Pipeline2)],
        RunTarget::Ablation1 => vec![canonical(Target::Ablation1)],
        RunTarget::Ablation2 => vec![canonical(Target::Ablation2)],
        RunTarget::All => Target::ALL.into_iter().map(canonical).collect(),
        RunTarget::Config => vec![("config".to_string(), config.pipelines.clone())],
    }
}

fn write(path: &Path, text: &str) -> CliResult {
    fs::write(path, text).map_err(|e| (EXIT_EXPERIMENT, format!("{}: {e}", path.display())))
}

fn run(args: RunArgs) -> CliResult {
    let config = load_config(args.config.as_deref())?;
    let formats = args
        .format
        .iter()
        .map(|f| f.parse::<Format>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(schema)?;
    let seeds = args
        .seeds
        .clone()
        .or(args.seed.map(|s| vec![s]))
        .or(config.seeds.clone())
        .unwrap_or_else(|| vec![1]);
    let mut options = config.options.clone();
    if let Some(k) = args.cv_folds {
        options.cv_folds = k;
    }
    if let Some(n) = args.search_iter {
        options.search_iter = n;
    }
    if args.weighted {
        options.averaging = Averaging::Weighted;
    }
    let data = args
        .data
        .clone()
        .or(config.data.as_ref().map(PathBuf::from))
        .ok_or_else(|| schema("no dataset: pass --data or set SLEEPSCREEN_DATA"))?;
    let table = dataset::prepare(&data, &EncodingSpec::default()).map_err(schema)?;
    let mut splits: BTreeMap<u64, (DataTable, DataTable)> = BTreeMap::new();
    for &s in &seeds {
        splits.insert(
            s,
            dataset::stratified_split(&table, TRAIN_FRACTION, s).map_err(schema)?,
        );
    }

    let mut failures = 0;
    for (target, specs) in specs_for(args.target, &config) {
        if specs.is_empty() {
            return Err(schema(format!("no pipelines to run for `{target}`")));
        }
        let dir = args.out.join(&target);
        fs::create_dir_all(&dir)
            .map_err(|e| (EXIT_EXPERIMENT, format!("{}: {e}", dir.display())))?;
        let mut groups: Vec<Vec<ExperimentReport>> = Vec::new();
        for spec in &specs {
            let mut runs = Vec::new();
            for &s in &seeds {
                let (train, test) = &splits[&s];
                eprintln!("[{target}] {} seed {s}", spec.name);
                match run_experiment(spec, train, test, s, &options) {
                    Ok(r) => runs.push(r),
                    Err(e) => {
                        failures += 1;
                        eprintln!("[{target}] {} seed {s} failed: {e}", spec.name);
                    }
                }
            }
            if runs.is_empty() {
                continue;
            }
            let stable: Vec<ExperimentReport> = runs.iter().map(|r| r.without_timing()).collect();
            for &f in &formats {
                write(
                    &dir.join(format!("{}.{}", spec.name, f.extension())),
                    &report::render_runs(&stable, f),
                )?;
            }
            groups.push(runs);
        }
        let rows: Vec<_> = groups.iter().map(|g| report::summarize(g)).collect();
        let title = format!("{target} (data: {}, seeds: {seeds:?})", data.display());
        for &f in &formats {
            write(
                &dir.join(format!("summary.{}", f.extension())),
                &report::render_summary(&title, &rows, f),
            )?;
            write(
                &dir.join(format!("timing.{}", f.extension())),
                &report::render_timing(&groups, f),
            )?;
        }
        println!("{}", report::summary_markdown(&title, &rows));
    }
    if failures > 0 {
        return Err((
            EXIT_EXPERIMENT,
            format!("{failures} experiment run(s) failed"),
        ));
    }
    Ok(())
}

fn read_report(path: &Path, seed: Option<u64>) -> Result<ExperimentReport, (u8, String)> {
    let stats_err = |m: String| (EXIT_STATS, format!("{}: {m}", path.display()));
    let text = fs::read_to_string(path).map_err(|e| stats_err(e.to_string()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| stats_err(e.to_string()))?;
    let runs: Vec<ExperimentReport> = if value.is_array() {
        serde_json::from_value(value)
    } else {
        serde_json::from_value(value).map(|r| vec![r])
    }
    .map_err(|e| stats_err(e.to_string()))?;
    match seed {
        Some(s) => runs.into_iter().find(|r| r.seed == s),
        None => runs.into_iter().next(),
    }
    .ok_or_else(|| stats_err("no matching run".into()))
}

fn stats(a: &Path, b: &Path, alternative: &str, seed: Option<u64>) -> CliResult {
    let alternative: Alternative = alternative.parse().map_err(|e| (EXIT_STATS, e))?;
    let ra = read_report(a, seed)?;
    let rb = read_report(b, seed)?;
    let w =
        compare_with_wilcoxon(&ra, &rb, alternative).map_err(|e| (EXIT_STATS, e.to_string()))?;
    println!(
        "{} vs {} ({} folds, alternative {alternative})",
        ra.name, rb.name, w.n_effective
    );
    println!("R+ = {}, R- = {}, min = {}", w.r_plus, w.r_minus, w.w_min);
    println!("W = {}, p = {:.8} ({:?})", w.statistic, w.p_value, w.method);
    if w.p_value < 0.05 {
        println!("significant at 0.05");
    } else {
        println!("not significant at 0.05");
    }
    Ok(())
}
