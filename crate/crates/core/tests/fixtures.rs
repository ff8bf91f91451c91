mod common;

use common::{f64s, fixture, rows, surrogate, usizes};
use sleepscreen_core::dataset::DataTable;
use sleepscreen_core::eval::{metrics, wilcoxon, Alternative, Averaging, ConfusionMatrix};
use sleepscreen_core::feature_select::{mutual_info, MiConfig};
use sleepscreen_core::reduce::{fisher_criterion, lda_fit};
use sleepscreen_core::transform::{find_tomek_links, quantile, robust_apply, robust_fit};
use sleepscreen_core::Matrix;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + b.abs())
}

#[test]
fn quantiles_and_robust_scaling() {
    for case in fixture("quantiles")["cases"].as_array().unwrap() {
        let input = f64s(&case["input"]);
        assert!(close(
            quantile(&input, 0.25),
            case["q1"].as_f64().unwrap(),
            1e-12
        ));
        assert!(close(
            quantile(&input, 0.5),
            case["median"].as_f64().unwrap(),
            1e-12
        ));
        assert!(close(
            quantile(&input, 0.75),
            case["q3"].as_f64().unwrap(),
            1e-12
        ));
        let x = Matrix::from_columns(&[input]);
        let scaled = robust_apply(&robust_fit(&x), &x).column(0);
        for (got, want) in scaled.iter().zip(f64s(&case["robust_scaled"])) {
            assert!(close(*got, want, 1e-12), "{got} vs {want}");
        }
    }
}

#[test]
fn confusion_metrics_match() {
    for case in fixture("confusion_metrics")["cases"].as_array().unwrap() {
        let counts: Vec<Vec<u64>> = rows(&case["matrix"])
            .into_iter()
            .map(|r| r.into_iter().map(|v| v as u64).collect())
            .collect();
        let cm = ConfusionMatrix::from_counts(counts);
        for (avg, key) in [
            (Averaging::Macro, "macro"),
            (Averaging::Weighted, "weighted"),
        ] {
            let m = metrics(&cm, avg).unwrap();
            let want = &case[key];
            assert!(close(m.accuracy, case["accuracy"].as_f64().unwrap(), 1e-12));
            assert!(close(
                m.precision,
                want["precision"].as_f64().unwrap(),
                1e-12
            ));
            assert!(close(m.recall, want["recall"].as_f64().unwrap(), 1e-12));
            assert!(close(m.f1, want["f1"].as_f64().unwrap(), 1e-12));
        }
    }
}

#[test]
fn wilcoxon_cases_match() {
    let cases = fixture("wilcoxon")["cases"].as_array().unwrap().clone();
    assert_eq!(cases.len(), 50);
    for case in &cases {
        let (a, b) = (f64s(&case["a"]), f64s(&case["b"]));
        for (alt, key) in [
            (Alternative::Greater, "p_greater"),
            (Alternative::Less, "p_less"),
            (Alternative::TwoSided, "p_two_sided"),
        ] {
            let w = wilcoxon(&a, &b, alt).unwrap();
            assert!(
                (w.p_value - case[key].as_f64().unwrap()).abs() <= 1e-9,
                "{key}: {case}"
            );
            assert_eq!(w.r_plus, case["r_plus"].as_f64().unwrap());
            assert_eq!(w.r_minus, case["r_minus"].as_f64().unwrap());
            assert_eq!(w.n_effective as u64, case["n_effective"].as_u64().unwrap());
        }
    }
}

#[test]
fn tomek_links_match() {
    for case in fixture("tomek_links")["cases"].as_array().unwrap() {
        let table =
            DataTable::from_matrix(Matrix::from_rows(&rows(&case["x"])), usizes(&case["y"]));
        let want: Vec<(usize, usize)> = case["links"]
            .as_array()
            .unwrap()
            .iter()
            .map(|p| {
                (
                    p[0].as_u64().unwrap() as usize,
                    p[1].as_u64().unwrap() as usize,
                )
            })
            .collect();
        assert_eq!(find_tomek_links(&table), want);
    }
}

#[test]
fn lda_eigenvalues_and_fisher() {
    for case in fixture("lda_fisher")["cases"].as_array().unwrap() {
        let x = Matrix::from_rows(&rows(&case["x"]));
        let y = usizes(&case["y"]);
        let m = case["m"].as_u64().unwrap() as usize;
        let lda = lda_fit(&x, &y, m, Some(0.0)).unwrap();
        for (got, want) in lda.eigenvalues.iter().zip(f64s(&case["eigenvalues"])) {
            assert!(close(*got, want, 1e-6), "{got} vs {want}");
        }
        let j = fisher_criterion(&x, &y, &lda.projection).unwrap();
        assert!(
            close(j, case["fisher_criterion"].as_f64().unwrap(), 1e-6),
            "{j}"
        );
    }
}

#[test]
fn histogram_mi_and_encoding_match() {
    let case = &fixture("mi_histogram")["cases"][0];
    let table = surrogate();
    let names: Vec<String> = case["feature_names"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    assert_eq!(table.column_names(), names);
    assert_eq!(table.labels, usizes(&case["y"]));
    let x = rows(&case["x"]);
    for (i, row) in x.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            assert!(close(table.x.get(i, j), *v, 1e-12), "row {i} col {j}");
        }
    }
    let bins = case["bins"].as_u64().unwrap() as usize;
    let s = mutual_info(&table.x, &table.labels, MiConfig::Histogram { bins }).unwrap();
    for (got, want) in s.mi.iter().zip(f64s(&case["mi"])) {
        assert!((got - want).abs() <= 1e-6, "{got} vs {want}");
    }
}
