mod common;

use common::blobs_with_ids;
use rand::Rng;
use serde_json::json;
use sleepscreen_core::models::{fit, ClassifierSpec, Family, ModelError};
use sleepscreen_core::{rng, Matrix};

/// Two informative blob coordinates plus one uniform noise column.
fn data(seed: u64) -> (Matrix, Vec<usize>) {
    let t = blobs_with_ids(&[30, 50, 40], seed);
    let mut r = rng::seeded(seed + 100);
    let rows: Vec<Vec<f64>> =
        t.x.iter_rows()
            .map(|row| vec![row[1], row[2], r.gen_range(-3.0..3.0)])
            .collect();
    (Matrix::from_rows(&rows), t.labels)
}

fn accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    pred.iter().zip(truth).filter(|(a, b)| a == b).count() as f64 / truth.len() as f64
}

#[test]
fn every_family_learns_blobs() {
    let (x, y) = data(1);
    let (xt, yt) = data(2);
    for family in Family::ALL {
        let spec = ClassifierSpec::new(family).with_seed(5);
        let model = fit(&spec, &x, &y).unwrap();
        let acc = accuracy(&model.predict(&xt).unwrap(), &yt);
        assert!(acc >= 0.85, "{family}: held-out accuracy {acc}");
        let p = model.predict_proba(&xt).unwrap();
        assert_eq!((p.rows(), p.cols()), (xt.rows(), 3));
        for row in p.iter_rows() {
            assert!(
                row.iter().all(|v| (0.0..=1.0).contains(v)),
                "{family}: {row:?}"
            );
            assert!(
                (row.iter().sum::<f64>() - 1.0).abs() < 1e-9,
                "{family}: {row:?}"
            );
        }
    }
}

#[test]
fn fits_repeat_under_a_seed() {
    let (x, y) = data(3);
    for family in Family::ALL {
        let spec = ClassifierSpec::new(family).with_seed(9);
        let a = fit(&spec, &x, &y).unwrap().predict_proba(&x).unwrap();
        let b = fit(&spec, &x, &y).unwrap().predict_proba(&x).unwrap();
        assert_eq!(a, b, "{family}");
    }
}

#[test]
fn tree_importances_favor_signal() {
    let (x, y) = data(4);
    for family in [
        Family::Dtree,
        Family::Rforest,
        Family::Etrees,
        Family::Gboost,
        Family::Adaboost,
    ] {
        let imp = fit(&ClassifierSpec::new(family).with_seed(2), &x, &y)
            .unwrap()
            .feature_importances()
            .unwrap();
        assert_eq!(imp.len(), 3);
        assert!(imp.iter().all(|v| *v >= 0.0), "{family}: {imp:?}");
        assert!(
            (imp.iter().sum::<f64>() - 1.0).abs() < 1e-9,
            "{family}: {imp:?}"
        );
        assert!(imp[2] < imp[0].max(imp[1]), "{family}: {imp:?}");
    }
    for family in [Family::Logreg, Family::Knn, Family::Mlp] {
        let model = fit(&ClassifierSpec::new(family), &x, &y).unwrap();
        assert!(matches!(
            model.feature_importances(),
            Err(ModelError::UnsupportedFamily(_))
        ));
    }
}

#[test]
fn one_neighbor_memorizes_training_rows() {
    let (x, y) = data(6);
    let model = fit(
        &ClassifierSpec::new(Family::Knn).with("k", json!(1)),
        &x,
        &y,
    )
    .unwrap();
    assert_eq!(model.predict(&x).unwrap(), y);
}

#[test]
fn unlimited_tree_fits_training_rows() {
    let (x, y) = data(7);
    let spec = ClassifierSpec::new(Family::Dtree).with("max_depth", json!(null));
    let model = fit(&spec, &x, &y).unwrap();
    assert_eq!(model.predict(&x).unwrap(), y);
}

#[test]
fn bad_inputs_are_rejected() {
    let (x, y) = data(8);
    assert!(matches!(
        fit(
            &ClassifierSpec::new(Family::Knn).with("k", json!(0)),
            &x,
            &y
        ),
        Err(ModelError::InvalidHyperparameter { .. })
    ));
    assert!(matches!(
        fit(
            &ClassifierSpec::new(Family::Gboost).with("learning_rate", json!(-1.0)),
            &x,
            &y
        ),
        Err(ModelError::InvalidHyperparameter { .. })
    ));
    assert!(fit(&ClassifierSpec::new(Family::Logreg), &x, &y[1..]).is_err());
    let model = fit(&ClassifierSpec::new(Family::Rforest), &x, &y).unwrap();
    assert!(model.predict(&Matrix::zeros(2, 5)).is_err());
}
