#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use rand::Rng;
use serde_json::Value;
use sleepscreen_core::dataset::{self, DataTable, EncodingSpec};
use sleepscreen_core::neural::{one_hot, Activation, Loss, Network};
use sleepscreen_core::pipeline::{FittedStage, PipelineError, Stage, StageSummary};
use sleepscreen_core::{rng, Matrix};

pub fn repo_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .join(rel)
}

pub fn fixture(name: &str) -> Value {
    let path = repo_path(&format!("fixtures/{name}.json"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    serde_json::from_str(&text).expect("fixture parses")
}

pub fn f64s(v: &Value) -> Vec<f64> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect()
}

pub fn usizes(v: &Value) -> Vec<usize> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_u64().unwrap() as usize)
        .collect()
}

pub fn rows(v: &Value) -> Vec<Vec<f64>> {
    v.as_array().unwrap().iter().map(f64s).collect()
}

/// `$SLEEPSCREEN_DATA` when set, else the committed surrogate.
pub fn data_path() -> (PathBuf, bool) {
    match std::env::var_os("SLEEPSCREEN_DATA") {
        Some(p) => (PathBuf::from(p), true),
        None => (repo_path("data/sleep_surrogate.csv"), false),
    }
}

pub fn surrogate() -> DataTable {
    dataset::prepare(
        repo_path("data/sleep_surrogate.csv"),
        &EncodingSpec::default(),
    )
    .unwrap()
}

/// Wraps a stage and records every row matrix its `fit` receives.
#[derive(Debug)]
pub struct Spy {
    pub inner: Box<dyn Stage>,
    pub seen: Arc<Mutex<Vec<Matrix>>>,
}

impl Spy {
    pub fn wrap(inner: Box<dyn Stage>) -> (Self, Arc<Mutex<Vec<Matrix>>>) {
        let seen = Arc::new(Mutex::new(Vec::new()));
        (
            Self {
                inner,
                seen: seen.clone(),
            },
            seen,
        )
    }
}

impl Stage for Spy {
    fn name(&self) -> String {
        format!("spy({})", self.inner.name())
    }

    fn fit(&self, train: &DataTable) -> Result<(DataTable, Box<dyn FittedStage>), PipelineError> {
        self.seen.lock().unwrap().push(train.x.clone());
        self.inner.fit(train)
    }
}

/// Identity stage.
#[derive(Debug)]
pub struct Passthrough;

#[derive(Debug)]
struct FittedPassthrough;

impl Stage for Passthrough {
    fn name(&self) -> String {
        "passthrough".into()
    }

    fn fit(&self, train: &DataTable) -> Result<(DataTable, Box<dyn FittedStage>), PipelineError> {
        Ok((train.clone(), Box::new(FittedPassthrough)))
    }
}

impl FittedStage for FittedPassthrough {
    fn transform(&self, x: &Matrix) -> Result<Matrix, PipelineError> {
        Ok(x.clone())
    }

    fn summary(&self) -> StageSummary {
        StageSummary {
            stage: "passthrough".into(),
            resample: None,
            selected: None,
            details: Value::Null,
        }
    }
}

/// Three Gaussian blobs with an id column `i * 1000 + 0.5` first.
pub fn blobs_with_ids(n_per_class: &[usize], seed: u64) -> DataTable {
    let mut r = rng::seeded(seed);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (c, &n) in n_per_class.iter().enumerate() {
        for _ in 0..n {
            let id = rows.len() as f64 * 1000.0 + 0.5;
            let centre = c as f64 * 2.0;
            rows.push(vec![
                id,
                centre + r.gen_range(-1.5..1.5),
                -centre + r.gen_range(-1.5..1.5),
            ]);
            labels.push(c);
        }
    }
    DataTable::from_matrix(Matrix::from_rows(&rows), labels)
}

pub fn random_matrix(r: &mut impl Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_vec(
        rows,
        cols,
        (0..rows * cols).map(|_| r.gen_range(-1.0..1.0)).collect(),
    )
}

pub fn random_network(seed: u64) -> (Network, Matrix, Matrix, f64) {
    let mut r = rng::seeded(seed);
    let depth = r.gen_range(1..=3);
    let mut dims = vec![r.gen_range(1..=5)];
    for _ in 0..depth {
        dims.push(r.gen_range(1..=5));
    }
    let classify = r.gen_bool(0.5);
    let out = *dims.last().unwrap();
    if classify && out < 2 {
        *dims.last_mut().unwrap() = 2;
    }
    let mut acts: Vec<Activation> = (1..depth)
        .map(|_| {
            if r.gen_bool(0.7) {
                Activation::Relu
            } else {
                Activation::Identity
            }
        })
        .collect();
    let loss = if classify {
        acts.push(Activation::Softmax);
        Loss::CrossEntropy
    } else {
        acts.push(Activation::Identity);
        Loss::Mse
    };
    let mut net = Network::init(&dims, &acts, loss, seed).unwrap();
    for layer in &mut net.layers {
        for b in &mut layer.biases {
            *b = r.gen_range(-0.5..0.5);
        }
    }
    let n = r.gen_range(2..=6);
    let x = random_matrix(&mut r, n, dims[0]);
    let k = *dims.last().unwrap();
    let targets = if classify {
        one_hot(&(0..n).map(|_| r.gen_range(0..k)).collect::<Vec<_>>(), k)
    } else {
        random_matrix(&mut r, n, k)
    };
    let l2 = if r.gen_bool(0.5) { 0.01 } else { 0.0 };
    (net, x, targets, l2)
}

/// Largest relative error between backprop and central differences.
pub fn gradient_error(net: &Network, x: &Matrix, t: &Matrix, l2: f64) -> f64 {
    let acts = net.forward(x).unwrap();
    let g = net.backward(&acts, t, l2);
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    let mut compare = |analytic: f64, numeric: f64| {
        let scale = analytic.abs().max(numeric.abs()).max(1e-6);
        worst = worst.max((analytic - numeric).abs() / scale);
    };
    for l in 0..net.layers.len() {
        for idx in 0..net.layers[l].weights.as_slice().len() {
            let mut plus = net.clone();
            plus.layers[l].weights.as_mut_slice()[idx] += h;
            let mut minus = net.clone();
            minus.layers[l].weights.as_mut_slice()[idx] -= h;
            let numeric =
                (plus.loss(x, t, l2).unwrap() - minus.loss(x, t, l2).unwrap()) / (2.0 * h);
            compare(g.weights[l].as_slice()[idx], numeric);
        }
        for idx in 0..net.layers[l].biases.len() {
            let mut plus = net.clone();
            plus.layers[l].biases[idx] += h;
            let mut minus = net.clone();
            minus.layers[l].biases[idx] -= h;
            let numeric =
                (plus.loss(x, t, l2).unwrap() - minus.loss(x, t, l2).unwrap()) / (2.0 * h);
            compare(g.biases[l][idx], numeric);
        }
    }
    worst
}
