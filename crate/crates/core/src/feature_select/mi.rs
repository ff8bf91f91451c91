//! Mutual information between each feature and a discrete label.

use rand::Rng as _;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::digamma;

use super::SelectError;
use crate::matrix::Matrix;
use crate::rng;

/// Seed of the tie-breaking jitter used by the nearest-neighbor estimator.
const JITTER_SEED: u64 = 0x4d49;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum MiConfig {
    /// Nearest-neighbor estimator for a continuous feature and a discrete
    /// label.
    Knn { k: usize },
    /// Plug-in estimate on equal-width bins spanning `[min, max]`.
    Histogram { bins: usize },
}

impl Default for MiConfig {
    fn default() -> Self {
        Self::Knn { k: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiScores {
    /// Nats, one per feature, never negative.
    pub mi: Vec<f64>,
    pub config: MiConfig,
}

pub fn mutual_info(
    x: &Matrix,
    labels: &[usize],
    config: MiConfig,
) -> Result<MiScores, SelectError> {
    if x.rows() != labels.len() {
        return Err(SelectError::LengthMismatch {
            rows: x.rows(),
            labels: labels.len(),
        });
    }
    let mut distinct = labels.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(SelectError::DegenerateLabels);
    }
    let mi = (0..x.cols())
        .map(|j| {
            let col = x.column(j);
            let v = match config {
                MiConfig::Knn { k } => knn_mi(&jittered(&col, j as u64), labels, k.max(1)),
                MiConfig::Histogram { bins } => histogram_mi(&col, labels, bins.max(1)),
            };
            v.max(0.0)
        })
        .collect();
    Ok(MiScores { mi, config })
}

/// Bin index of each value: edges are `bins + 1` evenly spaced points from
/// min to max, a value falls in the last edge not above it, and the right
/// edge belongs to the final bin. A constant column maps to bin 0.
pub fn histogram_bins(col: &[f64], bins: usize) -> Vec<usize> {
    let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return vec![0; col.len()];
    }
    let step = (hi - lo) / bins as f64;
    let mut edges: Vec<f64> = (0..=bins).map(|i| i as f64 * step + lo).collect();
    edges[bins] = hi;
    col.iter()
        .map(|&v| {
            let above = edges.partition_point(|&e| e <= v);
            above.saturating_sub(1).min(bins - 1)
        })
        .collect()
}

fn histogram_mi(col: &[f64], labels: &[usize], bins: usize) -> f64 {
    let n = col.len() as f64;
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    let idx = histogram_bins(col, bins);
    let mut joint = vec![0.0; bins * n_classes];
    let mut px = vec![0.0; bins];
    let mut py = vec![0.0; n_classes];
    for (&b, &c) in idx.iter().zip(labels) {
        joint[b * n_classes + c] += 1.0;
        px[b] += 1.0;
        py[c] += 1.0;
    }
    let mut mi = 0.0;
    for b in 0..bins {
        for c in 0..n_classes {
            let nxy = joint[b * n_classes + c];
            if nxy > 0.0 {
                mi += nxy / n * (n * nxy / (px[b] * py[c])).ln();
            }
        }
    }
    mi
}

/// Column scaled to unit variance (not centered) plus Gaussian noise of
/// scale `1e-10 * max(1, mean |x|)`, so tied values become distinct.
fn jittered(col: &[f64], index: u64) -> Vec<f64> {
    let n = col.len() as f64;
    let mean = col.iter().sum::<f64>() / n;
    let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    let scale = if sd > 0.0 { sd } else { 1.0 };
    let scaled: Vec<f64> = col.iter().map(|v| v / scale).collect();
    let amp = 1e-10 * (scaled.iter().map(|v| v.abs()).sum::<f64>() / n).max(1.0);
    let mut r = rng::derived(JITTER_SEED, index);
    scaled
        .iter()
        .map(|v| {
            let (u1, u2): (f64, f64) = (1.0 - r.gen::<f64>(), r.gen());
            let z = (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
            v + amp * z
        })
        .collect()
}

// Samples whose class has a single member carry no neighbor information
// and are dropped, as are their labels' counts.
fn knn_mi(col: &[f64], labels: &[usize], k: usize) -> f64 {
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut members: Vec<Vec<f64>> = vec![Vec::new(); n_classes];
    for (&v, &c) in col.iter().zip(labels) {
        members[c].push(v);
    }
    for m in &mut members {
        m.sort_by(f64::total_cmp);
    }
    let kept: Vec<usize> = (0..col.len())
        .filter(|&i| members[labels[i]].len() > 1)
        .collect();
    if kept.is_empty() {
        return 0.0;
    }
    let mut all: Vec<f64> = kept.iter().map(|&i| col[i]).collect();
    all.sort_by(f64::total_cmp);

    let n = kept.len() as f64;
    let (mut sum_k, mut sum_nc, mut sum_m) = (0.0, 0.0, 0.0);
    for &i in &kept {
        let own = &members[labels[i]];
        let ki = k.min(own.len() - 1);
        let r = kth_distance(own, col[i], ki);
        // neighbors strictly closer than r in the pooled sample, self included
        let lo = all.partition_point(|&v| v <= col[i] - r);
        let hi = all.partition_point(|&v| v < col[i] + r);
        let m = hi.saturating_sub(lo).max(1);
        sum_k += digamma(ki as f64);
        sum_nc += digamma(own.len() as f64);
        sum_m += digamma(m as f64);
    }
    digamma(n) + (sum_k - sum_nc - sum_m) / n
}

// Distance from `v` (a member of `sorted`) to its k-th nearest other member.
fn kth_distance(sorted: &[f64], v: f64, k: usize) -> f64 {
    let pos = sorted.partition_point(|&s| s < v);
    let (mut left, mut right) = (pos, pos + 1);
    let mut d = 0.0;
    for _ in 0..k {
        let dl = if left > 0 {
            v - sorted[left - 1]
        } else {
            f64::INFINITY
        };
        let dr = if right < sorted.len() {
            sorted[right] - v
        } else {
            f64::INFINITY
        };
        if dl <= dr {
            d = dl;
            left -= 1;
        } else {
            d = dr;
            right += 1;
        }
    }
    d
}
