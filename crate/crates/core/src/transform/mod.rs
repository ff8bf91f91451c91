//! Scalers and resamplers used as pipeline stages.

pub mod resample;
pub mod scale;

pub use resample::{
    find_tomek_links, remove_tomek_links, smote, smote_tomek, ResampleError, ResampleReport,
    TomekPolicy,
};
pub use scale::{
    minmax_apply, minmax_fit, quantile, robust_apply, robust_fit, MinMaxParams, RobustScalerParams,
};
