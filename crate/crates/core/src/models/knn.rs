//! Brute-force k-nearest-neighbor classifier.

use serde::{Deserialize, Serialize};

use crate::matrix::{squared_euclidean, Matrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knn {
    pub k: usize,
    pub x: Matrix,
    pub labels: Vec<usize>,
    pub n_classes: usize,
}

impl Knn {
    pub fn fit(x: &Matrix, labels: &[usize], n_classes: usize, k: usize) -> Self {
        Self {
            k: k.min(x.rows()),
            x: x.clone(),
            labels: labels.to_vec(),
            n_classes,
        }
    }

    /// Neighbor vote fractions. Distance ties go to the lower training
    /// index; `predict` resolves vote ties to the lower class.
    pub fn predict_proba(&self, query: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(query.rows(), self.n_classes);
        let mut dist: Vec<(f64, usize)> = Vec::with_capacity(self.x.rows());
        for q in 0..query.rows() {
            dist.clear();
            dist.extend(
                self.x
                    .iter_rows()
                    .enumerate()
                    .map(|(i, r)| (squared_euclidean(query.row(q), r), i)),
            );
            let by_dist =
                |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
            if self.k < dist.len() {
                dist.select_nth_unstable_by(self.k - 1, by_dist);
            }
            for &(_, i) in &dist[..self.k] {
                let c = self.labels[i];
                out.set(q, c, out.get(q, c) + 1.0 / self.k as f64);
            }
        }
        out
    }
}
