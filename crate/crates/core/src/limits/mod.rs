//! Limit laws indexed by theorem: parameter windows, affine normalization of
//! raw statistics, reference distributions and Kolmogorov-Smirnov distances.

mod ks;
mod reference;
mod theorem;

use thiserror::Error;

use crate::dist::DistError;

pub use ks::{empirical_cdf, ks_distance, ks_two_sample, sorted};
pub use reference::{
    reference_for, reference_with_summands, stable_shape, ReferenceDistribution, ReferenceKind, DEFAULT_MC_SIZE,
    DEFAULT_SUMMANDS,
};
pub use theorem::{denormalize_statistic, normalize_statistic, TheoremId, TheoremParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LimitsError {
    #[error("regime error: {0}")]
    Regime(String),
    #[error("unknown theorem `{0}`")]
    UnknownTheorem(String),
    #[error("{0} is empty")]
    EmptySample(String),
    #[error("{0} is not sorted or contains NaN")]
    Unsorted(String),
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}
