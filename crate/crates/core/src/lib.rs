//! One-class classification toolkit.
//!
//! Models are fit on target-class samples only and decide, for a new
//! sample, whether it belongs to the target class:
//!
//! - [`svdd`]: Support Vector Data Description (minimum enclosing
//!   hypersphere) solved in the dual by [`smo`].
//! - [`ssvdd`]: Subspace SVDD, which jointly learns a linear projection and
//!   the description, regularized either by class variance (`ψ1`–`ψ4`) or
//!   by a graph Laplacian (kNN, within-cluster, between-cluster).
//! - [`baselines`]: ν one-class SVM.
//! - [`kernel_npt`]: RBF kernel and an explicit kernel map that turns each
//!   linear model into its kernelized counterpart.
//! - [`eval`]: metrics, grid search by geometric mean and the repeated
//!   train/test protocol.

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

pub mod baselines;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod kernel_npt;
pub mod laplacians;
pub mod linalg;
pub mod smo;
pub mod ssvdd;
pub mod svdd;

pub use dataset::{Dataset, Label};
pub use error::{OccError, Result};

/// Outcome of classifying one sample. Positive scores lie inside the
/// description; zero counts as inside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub label: Label,
    pub score: f64,
}

impl Decision {
    pub fn from_score(score: f64) -> Self {
        let label = if score >= 0.0 {
            Label::Target
        } else {
            Label::Outlier
        };
        Self { label, score }
    }
}

pub(crate) fn check_finite_view(m: ArrayView2<'_, f64>) -> Result<()> {
    for ((row, col), v) in m.indexed_iter() {
        if !v.is_finite() {
            return Err(OccError::NonFinite { row, col });
        }
    }
    Ok(())
}
