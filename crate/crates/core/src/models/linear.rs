//! Multinomial logistic regression with an L2 penalty.
//!
//! Fitted by damped Newton iterations with backtracking on internally
//! standardized features; coefficients are mapped back to the input scale
//! afterwards so prediction needs no preprocessing.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;
use crate::neural::softmax_inplace;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogregParams {
    /// Penalty `λ/2·‖W‖²` on standardized-scale weights (intercepts free).
    pub l2: f64,
    pub max_iter: usize,
    /// Stop once the max-abs gradient entry falls below this.
    pub tol: f64,
}

impl Default for LogregParams {
    fn default() -> Self {
        Self {
            l2: 1e-3,
            max_iter: 500,
            tol: 1e-7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticRegression {
    /// `d × K` weights on the input scale.
    pub weights: Matrix,
    pub intercept: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

struct Problem<'a> {
    z: &'a Matrix,
    labels: &'a [usize],
    k: usize,
    l2: f64,
}

impl Problem<'_> {
    fn dims(&self) -> usize {
        (self.z.cols() + 1) * self.k
    }

    // Parameter layout: class-major blocks of (d weights, 1 intercept).
    fn probs(&self, theta: &DVector<f64>, i: usize) -> Vec<f64> {
        let d = self.z.cols();
        let row = self.z.row(i);
        let mut s: Vec<f64> = (0..self.k)
            .map(|c| {
                let base = c * (d + 1);
                row.iter()
                    .enumerate()
                    .map(|(j, v)| v * theta[base + j])
                    .sum::<f64>()
                    + theta[base + d]
            })
            .collect();
        softmax_inplace(&mut s);
        s
    }

    fn penalty(&self, theta: &DVector<f64>) -> f64 {
        let d = self.z.cols();
        (0..self.k)
            .flat_map(|c| (0..d).map(move |j| c * (d + 1) + j))
            .map(|ix| theta[ix] * theta[ix])
            .sum::<f64>()
            * 0.5
            * self.l2
    }

    fn objective(&self, theta: &DVector<f64>) -> f64 {
        let n = self.z.rows();
        let nll: f64 = (0..n)
            .map(|i| -self.probs(theta, i)[self.labels[i]].max(1e-300).ln())
            .sum();
        nll / n as f64 + self.penalty(theta)
    }

    fn gradient_hessian(&self, theta: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let n = self.z.rows();
        let d = self.z.cols();
        let p = self.dims();
        let mut g = DVector::zeros(p);
        let mut h = DMatrix::zeros(p, p);
        let inv_n = 1.0 / n as f64;
        let mut xt = vec![0.0; d + 1];
        for i in 0..n {
            xt[..d].copy_from_slice(self.z.row(i));
            xt[d] = 1.0;
            let pr = self.probs(theta, i);
            for c in 0..self.k {
                let r = pr[c] - f64::from(u8::from(self.labels[i] == c));
                for (j, &v) in xt.iter().enumerate() {
                    g[c * (d + 1) + j] += r * v * inv_n;
                }
                for c2 in c..self.k {
                    let wgt = pr[c] * (f64::from(u8::from(c == c2)) - pr[c2]) * inv_n;
                    if wgt == 0.0 {
                        continue;
                    }
                    for (a, &va) in xt.iter().enumerate() {
                        let row = c * (d + 1) + a;
                        let start = if c == c2 { a } else { 0 };
                        for (b, &vb) in xt.iter().enumerate().skip(start) {
                            h[(row, c2 * (d + 1) + b)] += wgt * va * vb;
                        }
                    }
                }
            }
        }
        // mirror the upper triangle
        for r in 0..p {
            for c in 0..r {
                h[(r, c)] = h[(c, r)];
            }
        }
        for c in 0..self.k {
            for j in 0..d {
                let ix = c * (d + 1) + j;
                g[ix] += self.l2 * theta[ix];
                h[(ix, ix)] += self.l2;
            }
        }
        (g, h)
    }
}

impl LogisticRegression {
    pub fn fit(x: &Matrix, labels: &[usize], n_classes: usize, params: &LogregParams) -> Self {
        let d = x.cols();
        let n = x.rows() as f64;
        let mut mean = vec![0.0; d];
        let mut sd = vec![0.0; d];
        for row in x.iter_rows() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v / n;
            }
        }
        for row in x.iter_rows() {
            for j in 0..d {
                sd[j] += (row[j] - mean[j]).powi(2) / n;
            }
        }
        let sd: Vec<f64> = sd
            .iter()
            .map(|v| if v.sqrt() > 1e-12 { v.sqrt() } else { 1.0 })
            .collect();
        let mut z = x.clone();
        for i in 0..z.rows() {
            for (j, v) in z.row_mut(i).iter_mut().enumerate() {
                *v = (*v - mean[j]) / sd[j];
            }
        }

        let prob = Problem {
            z: &z,
            labels,
            k: n_classes,
            l2: params.l2,
        };
        let mut theta = DVector::zeros(prob.dims());
        let mut f = prob.objective(&theta);
        let mut converged = false;
        let mut iterations = 0;
        while iterations < params.max_iter {
            let (g, mut h) = prob.gradient_hessian(&theta);
            if g.amax() < params.tol {
                converged = true;
                break;
            }
            iterations += 1;
            // Softmax over-parameterization leaves one flat direction per
            // intercept shift; a tiny ridge keeps the system definite.
            for i in 0..h.nrows() {
                h[(i, i)] += 1e-10;
            }
            let step = match h.clone().cholesky() {
                Some(ch) => ch.solve(&(-&g)),
                None => -&g,
            };
            let slope = g.dot(&step);
            let mut t = 1.0;
            let mut accepted = false;
            while t > 1e-10 {
                let cand = &theta + &step * t;
                let fc = prob.objective(&cand);
                if fc <= f + 1e-4 * t * slope {
                    theta = cand;
                    f = fc;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                break;
            }
        }

        let mut weights = Matrix::zeros(d, n_classes);
        let mut intercept = vec![0.0; n_classes];
        for c in 0..n_classes {
            let base = c * (d + 1);
            let mut b = theta[base + d];
            for j in 0..d {
                let w = theta[base + j] / sd[j];
                weights.set(j, c, w);
                b -= w * mean[j];
            }
            intercept[c] = b;
        }
        Self {
            weights,
            intercept,
            iterations,
            converged,
        }
    }

    pub fn predict_proba(&self, x: &Matrix) -> Matrix {
        let mut s = x.matmul(&self.weights);
        for i in 0..s.rows() {
            let row = s.row_mut(i);
            for (v, b) in row.iter_mut().zip(&self.intercept) {
                *v += b;
            }
            softmax_inplace(row);
        }
        s
    }
}
