//! All-relevant feature selection against permuted shadow features.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, DiscreteCDF};

use super::SelectError;
use crate::matrix::Matrix;
use crate::models::ensemble::{Forest, ForestParams};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Confirmed,
    Rejected,
    Tentative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BorutaConfig {
    pub forest: ForestParams,
    pub alpha: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for BorutaConfig {
    fn default() -> Self {
        Self {
            forest: ForestParams::random_forest(),
            alpha: 0.05,
            max_iter: 100,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BorutaVerdicts {
    pub status: Vec<Status>,
    pub hit_counts: Vec<usize>,
    pub iterations_run: usize,
    pub alpha: f64,
}

impl BorutaVerdicts {
    pub fn confirmed(&self) -> Vec<usize> {
        self.indices(Status::Confirmed)
    }

    pub fn indices(&self, status: Status) -> Vec<usize> {
        (0..self.status.len())
            .filter(|&j| self.status[j] == status)
            .collect()
    }
}

/// Two-sided exact binomial p-value for `hits` successes in `n` fair trials.
pub fn two_sided_binomial(hits: usize, n: usize) -> f64 {
    let b = Binomial::new(0.5, n as u64).expect("valid binomial");
    let below = b.cdf(hits as u64);
    let above = if hits == 0 {
        1.0
    } else {
        b.sf(hits as u64 - 1)
    };
    (2.0 * below.min(above)).min(1.0)
}

/// Each iteration appends a permuted copy of every column, fits a random
/// forest, and scores a hit for each real feature whose importance beats
/// the best shadow. Still-tentative features are then tested against a
/// fair coin with a Bonferroni-corrected threshold. Stops early once no
/// feature is tentative.
pub fn boruta(
    x: &Matrix,
    labels: &[usize],
    cfg: &BorutaConfig,
) -> Result<BorutaVerdicts, SelectError> {
    let d = x.cols();
    if d < 2 {
        return Err(SelectError::TooFewFeatures(d));
    }
    if cfg.max_iter < 10 {
        return Err(SelectError::InvalidConfig(
            "max_iter must be at least 10".into(),
        ));
    }
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
        return Err(SelectError::InvalidConfig(
            "alpha must lie in (0, 1)".into(),
        ));
    }
    if x.rows() != labels.len() {
        return Err(SelectError::LengthMismatch {
            rows: x.rows(),
            labels: labels.len(),
        });
    }
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    let n = x.rows();
    let mut status = vec![Status::Tentative; d];
    let mut hits = vec![0usize; d];
    let mut iterations_run = 0;

    for it in 0..cfg.max_iter {
        let mut r = rng::derived(cfg.seed, it as u64);
        let mut shadow = x.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for j in 0..d {
            perm.shuffle(&mut r);
            for (i, &p) in perm.iter().enumerate() {
                shadow.set(i, j, x.get(p, j));
            }
        }
        let augmented = x.hstack(&shadow);
        let forest = Forest::fit(&augmented, labels, n_classes, &cfg.forest, r.gen());
        let imp = forest.feature_importances();
        let best_shadow = imp[d..].iter().copied().fold(0.0, f64::max);
        for j in 0..d {
            if imp[j] > best_shadow {
                hits[j] += 1;
            }
        }
        iterations_run = it + 1;

        let tentative: Vec<usize> = (0..d).filter(|&j| status[j] == Status::Tentative).collect();
        let threshold = cfg.alpha / tentative.len() as f64;
        for &j in &tentative {
            if two_sided_binomial(hits[j], iterations_run) < threshold {
                status[j] = if 2 * hits[j] > iterations_run {
                    Status::Confirmed
                } else {
                    Status::Rejected
                };
            }
        }
        if status.iter().all(|&s| s != Status::Tentative) {
            break;
        }
    }
    Ok(BorutaVerdicts {
        status,
        hit_counts: hits,
        iterations_run,
        alpha: cfg.alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_tails() {
        assert!((two_sided_binomial(8, 8) - 2.0 / 256.0).abs() < 1e-15);
        assert!((two_sided_binomial(0, 8) - 2.0 / 256.0).abs() < 1e-15);
        assert_eq!(two_sided_binomial(4, 8), 1.0);
    }

    #[test]
    fn rejects_bad_config() {
        let x = Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]);
        let cfg = BorutaConfig {
            max_iter: 5,
            ..Default::default()
        };
        assert!(matches!(
            boruta(&x, &[0, 1], &cfg),
            Err(SelectError::InvalidConfig(_))
        ));
        let one = Matrix::from_rows(&[[0.0], [1.0]]);
        assert_eq!(
            boruta(&one, &[0, 1], &BorutaConfig::default()),
            Err(SelectError::TooFewFeatures(1))
        );
    }
}
