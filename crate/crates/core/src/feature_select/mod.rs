//! Feature scoring and selection: mutual information filters and Boruta.

pub mod boruta;
pub mod mi;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use boruta::{boruta, BorutaConfig, BorutaVerdicts, Status};
pub use mi::{mutual_info, MiConfig, MiScores};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SelectError {
    #[error("labels contain fewer than two classes")]
    DegenerateLabels,
    #[error("requested {k} features but only {available} are scored")]
    KTooLarge { k: usize, available: usize },
    #[error("no scores to select from")]
    EmptyScores,
    #[error("{rows} rows but {labels} labels")]
    LengthMismatch { rows: usize, labels: usize },
    #[error("need at least two features, found {0}")]
    TooFewFeatures(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
#[derive(Default)]
pub enum SelectPolicy {
    TopK { k: usize },
    #[default]
    AboveMean,
}


/// Indices (ascending) retained by `policy`. Top-k breaks ties toward the
/// lower index; above-mean keeps scores strictly greater than the mean.
pub fn select_top(scores: &[f64], policy: SelectPolicy) -> Result<Vec<usize>, SelectError> {
    if scores.is_empty() {
        return Err(SelectError::EmptyScores);
    }
    let mut keep = match policy {
        SelectPolicy::TopK { k } => {
            if k > scores.len() {
                return Err(SelectError::KTooLarge {
                    k,
                    available: scores.len(),
                });
            }
            let mut order: Vec<usize> = (0..scores.len()).collect();
            order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
            order.truncate(k);
            order
        }
        SelectPolicy::AboveMean => {
            let mean = scores.iter().sum::<f64>() / scores.len() as f64;
            (0..scores.len()).filter(|&j| scores[j] > mean).collect()
        }
    };
    keep.sort_unstable();
    Ok(keep)
}
