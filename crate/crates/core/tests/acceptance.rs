//! One pass/fail line per acceptance criterion A1 to A11.
//!
//! Dataset-driven criteria read `$SLEEPSCREEN_DATA` when set and the
//! committed surrogate otherwise. A dataset-driven criterion that fails on
//! the surrogate is printed as FAIL but does not fail the test run, since its
//! bands describe the original file.

mod common;

use std::time::{Duration, Instant};

use common::{data_path, f64s, fixture, gradient_error, random_network, Spy};
use rand::Rng;
use sleepscreen_core::dataset::{self, stratified_split, DataTable, EncodingSpec};
use sleepscreen_core::eval::{
    cross_validate, metrics, stratified_kfold, wilcoxon, Alternative, Averaging, ConfusionMatrix,
};
use sleepscreen_core::feature_select::{boruta, BorutaConfig, Status};
use sleepscreen_core::models::{ClassifierSpec, Family};
use sleepscreen_core::pipeline::{
    canonical_specs, report::median, run_experiment, BuiltinStage, ExperimentOptions, Pipeline,
    PipelineSpec, Stage, StageKind, StageSpec,
};
use sleepscreen_core::reduce::{fisher_criterion, lda_fit};
use sleepscreen_core::transform::{remove_tomek_links, smote, TomekPolicy};
use sleepscreen_core::{rng, Matrix};

const SEEDS: [u64; 3] = [1, 2, 3];

struct Outcome {
    id: &'static str,
    title: &'static str,
    pass: bool,
    detail: String,
    uses_data: bool,
}

struct Ctx {
    table: DataTable,
    canonical: bool,
}

impl Ctx {
    fn split(&self, seed: u64) -> (DataTable, DataTable) {
        stratified_split(&self.table, 0.8, seed).unwrap()
    }
}

fn within(elapsed: Duration, limit_s: f64) -> (bool, String) {
    let s = elapsed.as_secs_f64();
    (s < limit_s, format!("{s:.2}s of {limit_s}s"))
}

fn spec(name: &str) -> PipelineSpec {
    canonical_specs()
        .into_iter()
        .find(|s| s.name == name)
        .unwrap_or_else(|| panic!("no canonical spec {name}"))
}

fn no_cv() -> ExperimentOptions {
    ExperimentOptions {
        cv_folds: 0,
        ..ExperimentOptions::default()
    }
}

fn a1(ctx: &Ctx) -> (bool, String) {
    let start = Instant::now();
    let mut bad = Vec::new();
    for seed in 0..20 {
        let (train, _) = ctx.split(seed);
        // labels: 0 Insomnia, 1 None, 2 Sleep Apnea
        if train.class_counts() != [62, 175, 62] {
            bad.push((seed, train.class_counts()));
        }
    }
    let (fast, t) = within(start.elapsed(), 1.0);
    (
        bad.is_empty() && fast,
        format!("train counts [62,175,62] for seeds 0..20, mismatches {bad:?}; {t}"),
    )
}

fn a2(ctx: &Ctx) -> (bool, String) {
    let start = Instant::now();
    let mut ok = true;
    let mut seen = Vec::new();
    for seed in SEEDS {
        let (train, _) = ctx.split(seed);
        let over = smote(&train, 5, seed).unwrap();
        ok &= over.class_counts() == [175, 175, 175];
        for policy in [TomekPolicy::Both, TomekPolicy::MajorityMember] {
            let (clean, removed) = remove_tomek_links(&over, policy);
            let counts = clean.class_counts();
            ok &= counts.iter().all(|c| (165..=175).contains(c)) && removed <= 20;
            seen.push((seed, counts, removed));
        }
    }
    let (fast, t) = within(start.elapsed(), 5.0);
    (
        ok && fast,
        format!("after SMOTE 175 each; after Tomek (seed, counts, removed) {seen:?}; {t}"),
    )
}

/// Macro metrics from expanded label pairs, counted one prediction at a time.
fn brute_force_macro(cm: &[Vec<u64>]) -> [f64; 4] {
    let k = cm.len();
    let mut pairs = Vec::new();
    for (t, row) in cm.iter().enumerate() {
        for (p, &n) in row.iter().enumerate() {
            pairs.extend(std::iter::repeat_n((t, p), n as usize));
        }
    }
    let correct = pairs.iter().filter(|(t, p)| t == p).count();
    let (mut prec, mut rec, mut f1) = (0.0, 0.0, 0.0);
    for c in 0..k {
        let tp = pairs.iter().filter(|&&(t, p)| t == c && p == c).count() as f64;
        let fp = pairs.iter().filter(|&&(t, p)| t != c && p == c).count() as f64;
        let fne = pairs.iter().filter(|&&(t, p)| t == c && p != c).count() as f64;
        let pc = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
        let rc = if tp + fne > 0.0 { tp / (tp + fne) } else { 0.0 };
        prec += pc;
        rec += rc;
        f1 += if pc + rc > 0.0 {
            2.0 * pc * rc / (pc + rc)
        } else {
            0.0
        };
    }
    let k = k as f64;
    [
        correct as f64 / pairs.len() as f64,
        prec / k,
        rec / k,
        f1 / k,
    ]
}

fn a3() -> (bool, String) {
    let start = Instant::now();
    let mut r = rng::seeded(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let counts: Vec<Vec<u64>> = loop {
            let c: Vec<Vec<u64>> = (0..3)
                .map(|_| (0..3).map(|_| r.gen_range(0..30)).collect())
                .collect();
            if c.iter().flatten().sum::<u64>() > 0 {
                break c;
            }
        };
        let want = brute_force_macro(&counts);
        let m = metrics(&ConfusionMatrix::from_counts(counts), Averaging::Macro).unwrap();
        for (g, w) in [m.accuracy, m.precision, m.recall, m.f1].iter().zip(want) {
            worst = worst.max((g - w).abs());
        }
    }
    let (fast, t) = within(start.elapsed(), 1.0);
    (
        worst <= 1e-12 && fast,
        format!("200 matrices, max deviation {worst:.2e} (limit 1e-12); {t}"),
    )
}

fn a4() -> (bool, String) {
    let start = Instant::now();
    let a: Vec<f64> = (1..=8).map(|i| i as f64 + 0.5).collect();
    let b: Vec<f64> = (1..=8).map(|i| i as f64).collect();
    let w = wilcoxon(&a, &b, Alternative::Greater).unwrap();
    let headline = w.statistic == 36.0 && (w.p_value - 0.00390625).abs() <= 1e-12;
    let mut worst: f64 = 0.0;
    let cases = fixture("wilcoxon")["cases"].as_array().unwrap().clone();
    for case in &cases {
        let (x, y) = (f64s(&case["a"]), f64s(&case["b"]));
        for (alt, key) in [
            (Alternative::Greater, "p_greater"),
            (Alternative::Less, "p_less"),
            (Alternative::TwoSided, "p_two_sided"),
        ] {
            let p = wilcoxon(&x, &y, alt).unwrap().p_value;
            worst = worst.max((p - case[key].as_f64().unwrap()).abs());
        }
    }
    let (fast, t) = within(start.elapsed(), 5.0);
    (
        headline && cases.len() == 50 && worst <= 1e-9 && fast,
        format!(
            "W = {}, p = {:.8}; {} fixture cases, max |dp| {worst:.2e} (limit 1e-9); {t}",
            w.statistic,
            w.p_value,
            cases.len()
        ),
    )
}

fn median_accuracy(ctx: &Ctx, spec: &PipelineSpec) -> f64 {
    let accs: Vec<f64> = SEEDS
        .iter()
        .map(|&s| {
            let (train, test) = ctx.split(s);
            run_experiment(spec, &train, &test, s, &no_cv())
                .unwrap()
                .test
                .accuracy
        })
        .collect();
    median(&accs)
}

fn a5(ctx: &Ctx) -> (bool, String) {
    let start = Instant::now();
    let rows = [("Base-LogReg", 0.93), ("P1-KNN", 0.96), ("P2-ETrees", 0.96)];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, band) in rows {
        let acc = median_accuracy(ctx, &spec(name));
        ok &= acc >= band;
        parts.push(format!("{name} {acc:.4} (>= {band})"));
    }
    let (fast, t) = within(start.elapsed(), 600.0);
    (ok && fast, format!("{}; {t}", parts.join(", ")))
}

fn a6(ctx: &Ctx) -> (bool, String) {
    let start = Instant::now();
    let unscaled = spec("Base-MLP");
    let scaled = PipelineSpec::new(
        "MLP-RobustScaler",
        vec![StageSpec::new(StageKind::RobustScaler)],
        ClassifierSpec::new(Family::Mlp),
    );
    let (raw, robust) = (
        median_accuracy(ctx, &unscaled),
        median_accuracy(ctx, &scaled),
    );
    let gap = (robust - raw) * 100.0;
    let (fast, t) = within(start.elapsed(), 180.0);
    (
        gap >= 15.0 && fast,
        format!("robust {robust:.4} vs unscaled {raw:.4}, gap {gap:.1} points (>= 15); {t}"),
    )
}

fn a7() -> (bool, String) {
    let start = Instant::now();
    let worst = (0..20)
        .map(|seed| {
            let (net, x, t, l2) = random_network(seed);
            gradient_error(&net, &x, &t, l2)
        })
        .fold(0.0, f64::max);
    let (fast, t) = within(start.elapsed(), 30.0);
    (
        worst <= 1e-4 && fast,
        format!("20 networks, max relative error {worst:.2e} (limit 1e-4); {t}"),
    )
}

fn a8(ctx: &Ctx) -> (bool, String) {
    let start = Instant::now();
    let (train, _) = ctx.split(1);
    let lda = lda_fit(&train.x, &train.labels, 2, None).unwrap();
    let fitted = fisher_criterion(&train.x, &train.labels, &lda.projection).unwrap();
    let d = train.n_cols();
    let mut r = rng::seeded(8);
    let mut best_random = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let w = Matrix::from_vec(d, 2, (0..d * 2).map(|_| r.gen_range(-1.0..1.0)).collect());
        if let Some(j) = fisher_criterion(&train.x, &train.labels, &w) {
            best_random = best_random.max(j);
        }
    }
    let (fast, t) = within(start.elapsed(), 10.0);
    (
        fitted >= best_random && fast,
        format!("LDA {fitted:.4} vs best of 1000 random {best_random:.4}; {t}"),
    )
}

fn a9() -> (bool, String) {
    let start = Instant::now();
    let mut r = rng::seeded(99);
    let n = 300;
    let labels: Vec<usize> = (0..n).map(|i| i % 2).collect();
    let rows: Vec<Vec<f64>> = labels
        .iter()
        .map(|&y| {
            let mut row: Vec<f64> = (0..5)
                .map(|j| y as f64 * (0.6 + 0.2 * j as f64) + r.gen_range(-1.0..1.0))
                .collect();
            row.extend((0..15).map(|_| r.gen_range(-1.0..1.0)));
            row
        })
        .collect();
    let x = Matrix::from_rows(&rows);
    let cfg = BorutaConfig {
        seed: 5,
        ..BorutaConfig::default()
    };
    let v = boruta(&x, &labels, &cfg).unwrap();
    let informative = v.status[..5].iter().all(|s| *s == Status::Confirmed);
    let rejected = v.status[5..]
        .iter()
        .filter(|s| **s == Status::Rejected)
        .count();
    let (fast, t) = within(start.elapsed(), 60.0);
    (
        informative && rejected >= 12 && fast,
        format!(
            "informative {:?}, noise rejected {rejected}/15 (>= 12), {} iterations; {t}",
            &v.status[..5],
            v.iterations_run
        ),
    )
}

fn a10(ctx: &Ctx) -> (bool, String) {
    let (train, test) = ctx.split(1);
    let mut worst = (String::new(), 0.0f64);
    for family in Family::ALL {
        let spec = PipelineSpec::new("latency", vec![], ClassifierSpec::new(family));
        let report = run_experiment(&spec, &train, &test, 1, &no_cv()).unwrap();
        let ms = report.timing.unwrap().test_ms_total;
        if ms > worst.1 {
            worst = (family.key().to_string(), ms);
        }
    }
    (
        worst.1 < 400.0,
        format!(
            "{} test rows, slowest {} at {:.3} ms (limit 400 ms)",
            test.n_rows(),
            worst.0,
            worst.1
        ),
    )
}

/// Every stage's `fit` input recorded during cross-validation must equal the
/// input obtained by fitting the same chain on that fold's training rows
/// alone; the first stage must see exactly those rows.
fn a11(ctx: &Ctx) -> (bool, String) {
    let (train, _) = ctx.split(1);
    let kinds = [
        StageKind::SmoteTomek,
        StageKind::RobustScaler,
        StageKind::MiSelect,
        StageKind::Lda,
    ];
    let seed = 4;
    let plan = stratified_kfold(&train.labels, 8, seed).unwrap();
    let mut logs = Vec::new();
    let mut stages: Vec<Box<dyn Stage>> = Vec::new();
    for k in kinds {
        let (spy, seen) = Spy::wrap(Box::new(
            BuiltinStage::new(&StageSpec::new(k), seed).unwrap(),
        ));
        stages.push(Box::new(spy));
        logs.push(seen);
    }
    let pipeline = Pipeline {
        stages,
        classifier: ClassifierSpec::new(Family::Knn),
    };
    cross_validate(&pipeline, &train, &plan, Averaging::Macro).unwrap();

    let mut ok = true;
    for f in 0..plan.k {
        let mut table = train.subset(&plan.train_indices(f));
        for (s, k) in kinds.iter().enumerate() {
            let seen = logs[s].lock().unwrap();
            ok &= seen.iter().filter(|m| **m == table.x).count() == 1;
            let stage = BuiltinStage::new(&StageSpec::new(*k), seed).unwrap();
            table = stage.fit(&table).unwrap().0;
        }
    }
    let calls: Vec<usize> = logs.iter().map(|l| l.lock().unwrap().len()).collect();
    ok &= calls.iter().all(|&c| c == plan.k);
    (
        ok,
        format!(
            "{} folds x {} stages, fit inputs reproduced from training rows only; calls per stage {calls:?}",
            plan.k,
            kinds.len()
        ),
    )
}

#[test]
fn acceptance() {
    let (path, canonical) = data_path();
    let ctx = Ctx {
        table: dataset::prepare(&path, &EncodingSpec::default()).unwrap(),
        canonical,
    };
    let source = if ctx.canonical {
        "SLEEPSCREEN_DATA"
    } else {
        "committed surrogate"
    };
    println!("data: {} ({source})", path.display());

    type Check<'a> = Box<dyn Fn() -> (bool, String) + 'a>;
    let checks: Vec<(&'static str, &'static str, bool, Check)> = vec![
        ("A1", "split fidelity", true, Box::new(|| a1(&ctx))),
        ("A2", "resampling counts", true, Box::new(|| a2(&ctx))),
        ("A3", "metric oracle", false, Box::new(a3)),
        ("A4", "exact Wilcoxon", false, Box::new(a4)),
        (
            "A5",
            "end-to-end accuracy bands",
            true,
            Box::new(|| a5(&ctx)),
        ),
        ("A6", "scaling sensitivity", true, Box::new(|| a6(&ctx))),
        ("A7", "gradient check", false, Box::new(a7)),
        ("A8", "LDA dominance", true, Box::new(|| a8(&ctx))),
        ("A9", "Boruta recovery", false, Box::new(a9)),
        ("A10", "latency bound", true, Box::new(|| a10(&ctx))),
        ("A11", "leakage contract", true, Box::new(|| a11(&ctx))),
    ];
    let outcomes: Vec<Outcome> = checks
        .into_iter()
        .map(|(id, title, uses_data, check)| {
            let (pass, detail) = check();
            let o = Outcome {
                id,
                title,
                pass,
                detail,
                uses_data,
            };
            println!(
                "{} {} {}: {}",
                o.id,
                if o.pass { "PASS" } else { "FAIL" },
                o.title,
                o.detail
            );
            o
        })
        .collect();
    let blocking: Vec<&str> = outcomes
        .iter()
        .filter(|o| !o.pass && (ctx.canonical || !o.uses_data))
        .map(|o| o.id)
        .collect();
    let advisory: Vec<&str> = outcomes
        .iter()
        .filter(|o| !o.pass && !ctx.canonical && o.uses_data)
        .map(|o| o.id)
        .collect();
    if !advisory.is_empty() {
        println!("not gating on surrogate data: {advisory:?}");
    }
    assert!(blocking.is_empty(), "failed criteria: {blocking:?}");
}
