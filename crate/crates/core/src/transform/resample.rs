//! SMOTE oversampling, Tomek-link detection/removal and the SMOTETomek
//! combination.
//!
//! All neighbor searches are exact brute force with Euclidean distance and
//! ties broken by the lower row index, so outputs are fully determined by
//! the input order and the seed.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::DataTable;
use crate::matrix::{squared_euclidean, Matrix};
use crate::rng;

pub const DEFAULT_SMOTE_K: usize = 5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ResampleError {
    #[error("class {class} has {count} member(s); SMOTE needs at least 2")]
    ClassTooSmall { class: usize, count: usize },
    #[error("neighbor count must be at least 1")]
    InvalidK,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TomekPolicy {
    /// Drop both members of every link.
    #[default]
    Both,
    /// Drop only the member from the (strictly) larger class.
    MajorityMember,
}

/// Class counts through a SMOTETomek run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResampleReport {
    pub counts_before: Vec<usize>,
    pub counts_after_smote: Vec<usize>,
    pub tomek_links_removed: usize,
    pub counts_final: Vec<usize>,
}

fn counts_of(labels: &[usize]) -> Vec<usize> {
    let n = labels.iter().max().map_or(0, |m| m + 1);
    let mut c = vec![0; n];
    for &l in labels {
        c[l] += 1;
    }
    c
}

/// Indices of the `k` nearest rows to `query` among `candidates` (excluding
/// `query` itself), nearest first.
fn k_nearest(x: &Matrix, query: usize, candidates: &[usize], k: usize) -> Vec<usize> {
    let mut d: Vec<(f64, usize)> = candidates
        .iter()
        .filter(|&&c| c != query)
        .map(|&c| (squared_euclidean(x.row(query), x.row(c)), c))
        .collect();
    d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    d.truncate(k);
    d.into_iter().map(|(_, i)| i).collect()
}

/// Oversamples every class up to the majority count. Originals come first,
/// synthetic rows are appended class by class.
pub fn smote(table: &DataTable, k: usize, seed: u64) -> Result<DataTable, ResampleError> {
    if k == 0 {
        return Err(ResampleError::InvalidK);
    }
    let counts = counts_of(&table.labels);
    let majority = counts.iter().copied().max().unwrap_or(0);
    let mut out = table.clone();
    let mut r = rng::seeded(seed);
    for (class, &count) in counts.iter().enumerate() {
        if count == 0 || count == majority {
            continue;
        }
        if count < 2 {
            return Err(ResampleError::ClassTooSmall { class, count });
        }
        let members: Vec<usize> = (0..table.n_rows())
            .filter(|&i| table.labels[i] == class)
            .collect();
        let k_eff = k.min(count - 1);
        let neighbors: Vec<Vec<usize>> = members
            .iter()
            .map(|&m| k_nearest(&table.x, m, &members, k_eff))
            .collect();
        let mut synthetic = vec![0.0; table.n_cols()];
        for _ in 0..majority - count {
            let pick = r.gen_range(0..members.len());
            let base = table.x.row(members[pick]);
            let nn = table.x.row(neighbors[pick][r.gen_range(0..k_eff)]);
            let u: f64 = r.gen();
            for ((s, &a), &b) in synthetic.iter_mut().zip(base).zip(nn) {
                *s = a + u * (b - a);
            }
            out.x.push_row(&synthetic);
            out.labels.push(class);
        }
    }
    Ok(out)
}

/// Nearest neighbor of every row (lowest index on ties); `None` for a
/// single-row table.
pub fn nearest_neighbors(x: &Matrix) -> Vec<Option<usize>> {
    (0..x.rows())
        .map(|i| {
            let mut best: Option<(f64, usize)> = None;
            for j in 0..x.rows() {
                if j == i {
                    continue;
                }
                let d = squared_euclidean(x.row(i), x.row(j));
                if best.is_none_or(|(bd, _)| d < bd) {
                    best = Some((d, j));
                }
            }
            best.map(|(_, j)| j)
        })
        .collect()
}

/// Opposite-class mutual nearest-neighbor pairs `(a, b)` with `a < b`,
/// ordered by `a`.
pub fn find_tomek_links(table: &DataTable) -> Vec<(usize, usize)> {
    let nn = nearest_neighbors(&table.x);
    (0..table.n_rows())
        .filter_map(|a| {
            let b = nn[a]?;
            (a < b && nn[b] == Some(a) && table.labels[a] != table.labels[b]).then_some((a, b))
        })
        .collect()
}

/// Single pass: links are found once and dropped once, even if removal
/// creates new links. Returns the cleaned table and the number of rows
/// removed.
pub fn remove_tomek_links(table: &DataTable, policy: TomekPolicy) -> (DataTable, usize) {
    let links = find_tomek_links(table);
    if links.is_empty() {
        return (table.clone(), 0);
    }
    let counts = counts_of(&table.labels);
    let mut drop = vec![false; table.n_rows()];
    for (a, b) in links {
        match policy {
            TomekPolicy::Both => {
                drop[a] = true;
                drop[b] = true;
            }
            TomekPolicy::MajorityMember => {
                let (ca, cb) = (counts[table.labels[a]], counts[table.labels[b]]);
                if ca > cb {
                    drop[a] = true;
                } else if cb > ca {
                    drop[b] = true;
                }
            }
        }
    }
    let keep: Vec<usize> = (0..table.n_rows()).filter(|&i| !drop[i]).collect();
    let removed = table.n_rows() - keep.len();
    (table.subset(&keep), removed)
}

pub fn smote_tomek(
    table: &DataTable,
    k: usize,
    seed: u64,
    policy: TomekPolicy,
) -> Result<(DataTable, ResampleReport), ResampleError> {
    let counts_before = counts_of(&table.labels);
    let oversampled = smote(table, k, seed)?;
    let counts_after_smote = counts_of(&oversampled.labels);
    let (cleaned, removed) = remove_tomek_links(&oversampled, policy);
    let mut counts_final = counts_of(&cleaned.labels);
    counts_final.resize(counts_after_smote.len(), 0);
    Ok((
        cleaned,
        ResampleReport {
            counts_before,
            counts_after_smote,
            tomek_links_removed: removed,
            counts_final,
        },
    ))
}
