mod common;

use common::{blobs_with_ids, surrogate, Passthrough, Spy};
use rand::Rng;
use sleepscreen_core::dataset::stratified_split;
use sleepscreen_core::eval::{cross_validate, stratified_kfold, timed_fit_predict, Averaging};
use sleepscreen_core::feature_select::{boruta, BorutaConfig, Status};
use sleepscreen_core::models::{ClassifierSpec, Family};
use sleepscreen_core::pipeline::{
    canonical_specs, run_experiment, BuiltinStage, ExperimentOptions, Pipeline, Stage, StageKind,
    StageSpec,
};
use sleepscreen_core::reduce::{fisher_criterion, lda_fit};
use sleepscreen_core::transform::{robust_apply, robust_fit};
use sleepscreen_core::{rng, Matrix};

fn builtin(spec: StageSpec) -> Box<dyn Stage> {
    Box::new(BuiltinStage::new(&spec, 11).unwrap())
}

fn rows_of(m: &Matrix) -> Vec<Vec<u64>> {
    m.iter_rows()
        .map(|r| r.iter().map(|v| v.to_bits()).collect())
        .collect()
}

#[test]
fn stages_never_fit_on_validation_rows() {
    let table = blobs_with_ids(&[20, 40, 25], 5);
    let plan = stratified_kfold(&table.labels, 5, 3).unwrap();
    let (s0, seen0) = Spy::wrap(builtin(StageSpec::new(StageKind::RobustScaler)));
    let (s1, seen1) = Spy::wrap(builtin(StageSpec::new(StageKind::SmoteTomek)));
    let (s2, seen2) = Spy::wrap(Box::new(Passthrough));
    let pipeline = Pipeline {
        stages: vec![Box::new(s0), Box::new(s1), Box::new(s2)],
        classifier: ClassifierSpec::new(Family::Knn),
    };
    cross_validate(&pipeline, &table, &plan, Averaging::Macro).unwrap();

    let train_sets: Vec<Matrix> = (0..plan.k)
        .map(|f| table.x.select_rows(&plan.train_indices(f)))
        .collect();
    let scaled: Vec<(Matrix, Matrix)> = (0..plan.k)
        .map(|f| {
            let p = robust_fit(&train_sets[f]);
            (
                robust_apply(&p, &train_sets[f]),
                robust_apply(&p, &table.x.select_rows(&plan.folds[f])),
            )
        })
        .collect();

    let seen0 = seen0.lock().unwrap();
    assert_eq!(seen0.len(), plan.k);
    let mut matched: Vec<usize> = seen0
        .iter()
        .map(|m| {
            train_sets
                .iter()
                .position(|t| t == m)
                .expect("first stage saw a fold's training rows")
        })
        .collect();
    matched.sort_unstable();
    assert_eq!(matched, (0..plan.k).collect::<Vec<_>>());

    for m in seen1.lock().unwrap().iter() {
        assert!(
            scaled.iter().any(|(t, _)| t == m),
            "resampler input is the scaled training fold"
        );
    }
    for m in seen2.lock().unwrap().iter() {
        let got = rows_of(m);
        let f = (0..plan.k)
            .max_by_key(|&f| {
                let train = rows_of(&scaled[f].0);
                got.iter().filter(|r| train.contains(r)).count()
            })
            .unwrap();
        let valid = rows_of(&scaled[f].1);
        assert!(
            got.iter().all(|r| !valid.contains(r)),
            "fold {f} validation row leaked"
        );
    }
}

#[test]
fn final_fit_sees_only_training_split() {
    let table = blobs_with_ids(&[20, 40, 25], 9);
    let (train, test) = stratified_split(&table, 0.8, 2).unwrap();
    let (spy, seen) = Spy::wrap(builtin(StageSpec::new(StageKind::MinmaxScaler)));
    let pipeline = Pipeline {
        stages: vec![Box::new(spy)],
        classifier: ClassifierSpec::new(Family::Logreg),
    };
    timed_fit_predict(&pipeline, &train, &test, Averaging::Macro).unwrap();
    assert_eq!(seen.lock().unwrap().as_slice(), std::slice::from_ref(&train.x));
}

fn report_json(name: &str, seed: u64) -> String {
    let table = surrogate();
    let (train, test) = stratified_split(&table, 0.8, seed).unwrap();
    let spec = canonical_specs()
        .into_iter()
        .find(|s| s.name == name)
        .unwrap();
    let options = ExperimentOptions {
        cv_folds: 4,
        ..ExperimentOptions::default()
    };
    run_experiment(&spec, &train, &test, seed, &options)
        .unwrap()
        .without_timing()
        .to_json()
}

#[test]
fn experiments_repeat_exactly_across_thread_counts() {
    for name in ["P1-KNN", "P2-KNN", "A1-SMOTETomek+RobustScaler+MI+LDA"] {
        let once = report_json(name, 2);
        assert_eq!(once, report_json(name, 2), "{name}");
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap();
        assert_eq!(
            once,
            pool.install(|| report_json(name, 2)),
            "{name} under 3 threads"
        );
        assert_ne!(once, report_json(name, 3), "{name} ignores its seed");
    }
}

#[test]
fn lda_beats_random_projections_on_blobs() {
    let mut r = rng::seeded(4);
    let rows: Vec<Vec<f64>> = (0..150)
        .map(|i| {
            let c = (i % 3) as f64;
            (0..5)
                .map(|j| c * (j as f64 - 2.0) * 0.7 + r.gen_range(-1.0..1.0))
                .collect()
        })
        .collect();
    let labels: Vec<usize> = (0..150).map(|i| i % 3).collect();
    let x = Matrix::from_rows(&rows);
    let lda = lda_fit(&x, &labels, 2, Some(0.0)).unwrap();
    let best = fisher_criterion(&x, &labels, &lda.projection).unwrap();
    let lambda_sum: f64 = lda.eigenvalues.iter().sum();
    assert!(
        (best - lambda_sum).abs() <= 1e-8 * best.max(1.0),
        "{best} vs {lambda_sum}"
    );
    for _ in 0..200 {
        let w = Matrix::from_vec(5, 2, (0..10).map(|_| r.gen_range(-1.0..1.0)).collect());
        let j = fisher_criterion(&x, &labels, &w).unwrap();
        assert!(j <= best + 1e-9, "{j} > {best}");
    }
}

#[test]
fn boruta_confirms_label_copy_and_is_deterministic() {
    let mut r = rng::seeded(8);
    let labels: Vec<usize> = (0..120).map(|i| i % 2).collect();
    let rows: Vec<Vec<f64>> = labels
        .iter()
        .map(|&y| {
            let mut row = vec![y as f64 + r.gen_range(-0.1..0.1)];
            row.extend((0..4).map(|_| r.gen_range(0.0..1.0)));
            row
        })
        .collect();
    let x = Matrix::from_rows(&rows);
    let cfg = BorutaConfig {
        seed: 3,
        ..BorutaConfig::default()
    };
    let v = boruta(&x, &labels, &cfg).unwrap();
    assert_eq!(v.status[0], Status::Confirmed);
    assert_eq!(v.hit_counts[0], v.iterations_run);
    assert!(
        v.status[1..].iter().all(|s| *s != Status::Confirmed),
        "{:?}",
        v.status
    );
    assert_eq!(v, boruta(&x, &labels, &cfg).unwrap());
}
