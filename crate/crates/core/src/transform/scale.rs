//! Column scalers. Both are per-column independent and never clip on apply.

use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;

/// Linear-interpolation quantile (type 7) of an ascending-sorted slice.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty slice");
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn quantile(values: &[f64], p: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, p)
}

/// Median/IQR scaling. Columns with zero IQR are centered only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustScalerParams {
    pub median: Vec<f64>,
    pub iqr: Vec<f64>,
}

impl RobustScalerParams {
    fn divisor(&self, j: usize) -> f64 {
        if self.iqr[j] == 0.0 {
            1.0
        } else {
            self.iqr[j]
        }
    }

    pub fn inverse(&self, x: &Matrix) -> Matrix {
        let mut out = x.clone();
        for i in 0..out.rows() {
            for j in 0..out.cols() {
                out.set(i, j, x.get(i, j) * self.divisor(j) + self.median[j]);
            }
        }
        out
    }
}

pub fn robust_fit(x: &Matrix) -> RobustScalerParams {
    let mut median = Vec::with_capacity(x.cols());
    let mut iqr = Vec::with_capacity(x.cols());
    for j in 0..x.cols() {
        let mut col = x.column(j);
        col.sort_by(f64::total_cmp);
        median.push(quantile_sorted(&col, 0.5));
        iqr.push((quantile_sorted(&col, 0.75) - quantile_sorted(&col, 0.25)).max(0.0));
    }
    RobustScalerParams { median, iqr }
}

pub fn robust_apply(params: &RobustScalerParams, x: &Matrix) -> Matrix {
    assert_eq!(
        params.median.len(),
        x.cols(),
        "robust scaler column mismatch"
    );
    let mut out = x.clone();
    for i in 0..out.rows() {
        for (j, v) in out.row_mut(i).iter_mut().enumerate() {
            *v = (*v - params.median[j]) / params.divisor(j);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxParams {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

pub fn minmax_fit(x: &Matrix) -> MinMaxParams {
    let mut min = vec![f64::INFINITY; x.cols()];
    let mut max = vec![f64::NEG_INFINITY; x.cols()];
    for row in x.iter_rows() {
        for (j, &v) in row.iter().enumerate() {
            min[j] = min[j].min(v);
            max[j] = max[j].max(v);
        }
    }
    if x.rows() == 0 {
        min.fill(0.0);
        max.fill(0.0);
    }
    MinMaxParams { min, max }
}

/// `(x - min) / (max - min)`; constant columns map to 0.
pub fn minmax_apply(params: &MinMaxParams, x: &Matrix) -> Matrix {
    assert_eq!(params.min.len(), x.cols(), "min-max scaler column mismatch");
    let mut out = x.clone();
    for i in 0..out.rows() {
        for (j, v) in out.row_mut(i).iter_mut().enumerate() {
            let range = params.max[j] - params.min[j];
            *v = if range == 0.0 {
                0.0
            } else {
                (*v - params.min[j]) / range
            };
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(v: &[f64]) -> Matrix {
        Matrix::from_columns(&[v.to_vec()])
    }

    #[test]
    fn robust_on_one_to_five() {
        let x = col(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let p = robust_fit(&x);
        assert_eq!(p.median, vec![3.0]);
        assert_eq!(p.iqr, vec![2.0]);
        assert_eq!(
            robust_apply(&p, &x).column(0),
            vec![-1.0, -0.5, 0.0, 0.5, 1.0]
        );
    }

    #[test]
    fn robust_constant_column() {
        let x = col(&[7.0, 7.0, 7.0]);
        let p = robust_fit(&x);
        assert_eq!(robust_apply(&p, &x).column(0), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn robust_inverse_round_trip() {
        let x = Matrix::from_rows(&[[1.5, -3.0], [2.25, 10.0], [9.0, 4.0], [0.1, 0.2]]);
        let p = robust_fit(&x);
        let back = p.inverse(&robust_apply(&p, &x));
        for (a, b) in back.as_slice().iter().zip(x.as_slice()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn minmax_cases() {
        let p = minmax_fit(&col(&[0.0, 5.0, 10.0]));
        assert_eq!(
            minmax_apply(&p, &col(&[0.0, 5.0, 10.0])).column(0),
            vec![0.0, 0.5, 1.0]
        );
        assert_eq!(minmax_apply(&p, &col(&[12.0])).column(0), vec![1.2]);
        let c = minmax_fit(&col(&[3.0, 3.0]));
        assert_eq!(
            minmax_apply(&c, &col(&[3.0, 3.0])).column(0),
            vec![0.0, 0.0]
        );
    }

    #[test]
    fn quantile_interpolates() {
        assert_eq!(quantile(&[4.0, 1.0, 3.0, 2.0], 0.25), 1.75);
        assert_eq!(quantile(&[5.0], 0.75), 5.0);
    }
}
