//! Linear discriminant analysis projection.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::ReduceError;
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaProjection {
    /// `d × m`, columns ordered by descending eigenvalue.
    pub projection: Matrix,
    pub class_means: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    pub epsilon: f64,
}

/// Within-class and between-class scatter (unnormalized sums).
pub fn scatter(x: &Matrix, labels: &[usize]) -> (DMatrix<f64>, DMatrix<f64>, Vec<Vec<f64>>) {
    let d = x.cols();
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut means = vec![vec![0.0; d]; n_classes];
    let mut counts = vec![0usize; n_classes];
    let mut overall = vec![0.0; d];
    for (row, &c) in x.iter_rows().zip(labels) {
        counts[c] += 1;
        for j in 0..d {
            means[c][j] += row[j];
            overall[j] += row[j];
        }
    }
    for (m, &n) in means.iter_mut().zip(&counts) {
        if n > 0 {
            m.iter_mut().for_each(|v| *v /= n as f64);
        }
    }
    overall.iter_mut().for_each(|v| *v /= x.rows() as f64);

    let mut sw = DMatrix::zeros(d, d);
    for (row, &c) in x.iter_rows().zip(labels) {
        let dev = nalgebra::DVector::from_iterator(d, (0..d).map(|j| row[j] - means[c][j]));
        sw += &dev * dev.transpose();
    }
    let mut sb = DMatrix::zeros(d, d);
    for (m, &n) in means.iter().zip(&counts) {
        let dev = nalgebra::DVector::from_iterator(d, (0..d).map(|j| m[j] - overall[j]));
        sb += (&dev * dev.transpose()) * n as f64;
    }
    (sw, sb, means)
}

/// Trace ratio `tr((WᵀSwW)⁻¹ WᵀSbW)` of the projection `w` (`d × m`).
pub fn fisher_criterion(x: &Matrix, labels: &[usize], w: &Matrix) -> Option<f64> {
    let (sw, sb, _) = scatter(x, labels);
    let w = to_dmatrix(w);
    let pw = w.transpose() * &sw * &w;
    let pb = w.transpose() * &sb * &w;
    pw.cholesky().map(|c| c.solve(&pb).trace())
}

fn to_dmatrix(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

/// `epsilon = None` uses `1e-4` times the mean diagonal of the within-class
/// scatter as ridge.
pub fn lda_fit(
    x: &Matrix,
    labels: &[usize],
    m: usize,
    epsilon: Option<f64>,
) -> Result<LdaProjection, ReduceError> {
    let d = x.cols();
    if x.rows() != labels.len() {
        return Err(ReduceError::DimensionMismatch {
            expected: x.rows(),
            found: labels.len(),
        });
    }
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut counts = vec![0usize; n_classes];
    labels.iter().for_each(|&c| counts[c] += 1);
    let present = counts.iter().filter(|&&c| c > 0).count();
    if m == 0 || m > present.saturating_sub(1).min(d) {
        return Err(ReduceError::InvalidComponents {
            m,
            classes: present,
            dims: d,
        });
    }
    if let Some(c) = counts.iter().position(|&c| c == 1) {
        return Err(ReduceError::ClassTooSmall(c));
    }
    let (mut sw, sb, class_means) = scatter(x, labels);
    let eps = epsilon.unwrap_or_else(|| 1e-4 * sw.diagonal().mean());
    for i in 0..d {
        sw[(i, i)] += eps;
    }
    let chol = sw.cholesky().ok_or(ReduceError::SingularScatter)?;
    let l = chol.l();
    let l_inv = l
        .clone()
        .solve_lower_triangular(&DMatrix::identity(d, d))
        .ok_or(ReduceError::SingularScatter)?;
    let sym = &l_inv * &sb * l_inv.transpose();
    let sym = (&sym + sym.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues: Vec<f64> = order[..m]
        .iter()
        .map(|&i| eig.eigenvalues[i].max(0.0))
        .collect();
    if eigenvalues[0] <= 0.0 || !eigenvalues.iter().all(|v| v.is_finite()) {
        return Err(ReduceError::SingularScatter);
    }
    let w = l_inv.transpose() * eig.eigenvectors;
    let mut projection = Matrix::zeros(d, m);
    for (k, &i) in order[..m].iter().enumerate() {
        for r in 0..d {
            projection.set(r, k, w[(r, i)]);
        }
    }
    Ok(LdaProjection {
        projection,
        class_means,
        eigenvalues,
        epsilon: eps,
    })
}

impl LdaProjection {
    pub fn transform(&self, x: &Matrix) -> Result<Matrix, ReduceError> {
        if x.cols() != self.projection.rows() {
            return Err(ReduceError::DimensionMismatch {
                expected: self.projection.rows(),
                found: x.cols(),
            });
        }
        Ok(x.matmul(&self.projection))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("projection serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_labels_rejected() {
        let x = Matrix::from_rows(&[[1.0, 2.0], [2.0, 1.0], [3.0, 3.0]]);
        assert!(lda_fit(&x, &[0, 0, 0], 1, None).is_err());
    }

    #[test]
    fn one_dimensional_is_scaled_identity() {
        let x = Matrix::from_rows(&[[0.0], [1.0], [5.0], [6.0]]);
        let p = lda_fit(&x, &[0, 0, 1, 1], 1, None).unwrap();
        assert!(p.projection.get(0, 0).abs() > 0.0);
        let z = p.transform(&Matrix::zeros(2, 1)).unwrap();
        assert_eq!(z.as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn dimension_mismatch() {
        let x = Matrix::from_rows(&[[0.0, 0.0], [1.0, 0.5], [5.0, 4.0], [6.0, 4.2]]);
        let p = lda_fit(&x, &[0, 0, 1, 1], 1, None).unwrap();
        assert!(matches!(
            p.transform(&Matrix::zeros(1, 3)),
            Err(ReduceError::DimensionMismatch { .. })
        ));
        assert!(p.to_json().contains("projection"));
    }
}
