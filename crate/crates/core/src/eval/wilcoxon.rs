//! Wilcoxon signed-rank test on paired samples.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::EvalError;

/// Largest effective sample size handled by the exact null distribution.
pub const EXACT_LIMIT: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    TwoSided,
    #[default]
    Greater,
    Less,
}

impl fmt::Display for Alternative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::TwoSided => "two-sided",
            Self::Greater => "greater",
            Self::Less => "less",
        })
    }
}

impl FromStr for Alternative {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "two-sided" => Ok(Self::TwoSided),
            "greater" => Ok(Self::Greater),
            "less" => Ok(Self::Less),
            other => Err(format!("unknown alternative `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    NormalApprox,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    pub r_plus: f64,
    pub r_minus: f64,
    pub w_min: f64,
    /// R+ for `greater`, R− for `less`, min(R+, R−) for two-sided.
    pub statistic: f64,
    pub p_value: f64,
    pub p_greater: f64,
    pub p_less: f64,
    pub n_effective: usize,
    pub method: Method,
    pub alternative: Alternative,
}

/// Average ranks of `values` (1-based), doubled so ties stay integral.
fn doubled_ranks(values: &[f64]) -> Vec<u64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0u64; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // positions i..=j hold ranks i+1..=j+1; their doubled mean is i+j+2
        for &o in &order[i..=j] {
            ranks[o] = (i + j + 2) as u64;
        }
        i = j + 1;
    }
    ranks
}

/// Number of sign assignments reaching each doubled positive-rank sum.
fn null_counts(ranks: &[u64]) -> Vec<f64> {
    let total: u64 = ranks.iter().sum();
    let mut counts = vec![0.0; total as usize + 1];
    counts[0] = 1.0;
    let mut reach = 0usize;
    for &r in ranks {
        let r = r as usize;
        for s in (0..=reach).rev() {
            if counts[s] != 0.0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    counts
}

pub fn wilcoxon(
    a: &[f64],
    b: &[f64],
    alternative: Alternative,
) -> Result<WilcoxonResult, EvalError> {
    if a.len() != b.len() {
        return Err(EvalError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let d: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| x - y)
        .filter(|v| *v != 0.0)
        .collect();
    if d.is_empty() {
        return Err(EvalError::AllZeroDifferences);
    }
    let n = d.len();
    let abs: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    let ranks = doubled_ranks(&abs);
    let plus2: u64 = ranks
        .iter()
        .zip(&d)
        .filter(|(_, v)| **v > 0.0)
        .map(|(r, _)| r)
        .sum();
    let total2: u64 = ranks.iter().sum();
    let r_plus = plus2 as f64 / 2.0;
    let r_minus = (total2 - plus2) as f64 / 2.0;

    let (p_greater, p_less, method) = if n <= EXACT_LIMIT {
        let counts = null_counts(&ranks);
        let all = 2f64.powi(n as i32);
        let obs = plus2 as usize;
        let ge: f64 = counts[obs..].iter().sum();
        let le: f64 = counts[..=obs].iter().sum();
        (ge / all, le / all, Method::Exact)
    } else {
        let nf = n as f64;
        let mean = nf * (nf + 1.0) / 4.0;
        let mut tie_term = 0.0;
        let mut sorted = abs.clone();
        sorted.sort_by(f64::total_cmp);
        let mut i = 0;
        while i < n {
            let mut j = i;
            while j + 1 < n && sorted[j + 1] == sorted[i] {
                j += 1;
            }
            let t = (j - i + 1) as f64;
            tie_term += t * t * t - t;
            i = j + 1;
        }
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term / 48.0;
        let z = (r_plus - mean) / var.sqrt();
        let normal = Normal::standard();
        (normal.sf(z), normal.cdf(z), Method::NormalApprox)
    };
    let w_min = r_plus.min(r_minus);
    let (statistic, p_value) = match alternative {
        Alternative::Greater => (r_plus, p_greater),
        Alternative::Less => (r_minus, p_less),
        Alternative::TwoSided => (w_min, (2.0 * p_greater.min(p_less)).min(1.0)),
    };
    Ok(WilcoxonResult {
        r_plus,
        r_minus,
        w_min,
        statistic,
        p_value,
        p_greater,
        p_less,
        n_effective: n,
        method,
        alternative,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_positive_eight() {
        let a = [0.99, 0.98, 0.97, 0.99, 0.96, 0.98, 0.97, 0.99];
        let b = [0.90, 0.91, 0.92, 0.89, 0.90, 0.93, 0.88, 0.90];
        let r = wilcoxon(&a, &b, Alternative::Greater).unwrap();
        assert_eq!(r.statistic, 36.0);
        assert_eq!(r.p_value, 0.00390625);
        assert_eq!(r.r_minus, 0.0);
    }

    #[test]
    fn equal_samples_rejected() {
        assert_eq!(
            wilcoxon(&[1.0, 2.0], &[1.0, 2.0], Alternative::TwoSided),
            Err(EvalError::AllZeroDifferences)
        );
    }

    #[test]
    fn null_distribution_sums_to_one() {
        let ranks = doubled_ranks(&[1.0, 2.0, 2.0, 3.0, 5.0, 5.0, 5.0]);
        assert_eq!(ranks, vec![2, 5, 5, 8, 12, 12, 12]);
        let c = null_counts(&ranks);
        let total: f64 = c.iter().sum();
        assert!((total / 128.0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn large_sample_uses_normal() {
        let a: Vec<f64> = (0..30).map(|i| i as f64 + 0.5).collect();
        let b: Vec<f64> = (0..30).map(|i| (i % 7) as f64).collect();
        let r = wilcoxon(&a, &b, Alternative::TwoSided).unwrap();
        assert_eq!(r.method, Method::NormalApprox);
        assert!(r.p_value > 0.0 && r.p_value <= 1.0);
    }
}
