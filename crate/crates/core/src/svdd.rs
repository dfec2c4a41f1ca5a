//! Support Vector Data Description: the smallest hypersphere (soft margin)
//! around the target data, solved in the dual.
//!
//! The dual is
//!
//! ```text
//! maximize   Σ α_i z_iᵀz_i − Σ_ij α_i α_j z_iᵀz_j
//! subject to 0 ≤ α_i ≤ C,  Σ α_i = 1
//! ```
//!
//! and the center is `a = Σ α_i z_i`.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{OccError, Result};
use crate::smo::{self, SmoOptions};
use crate::{check_finite_view, Decision};

/// Tolerance for deciding that α sits at 0 or at the box bound.
pub fn bound_tolerance(c: f64) -> f64 {
    crate::laplacians::SUPPORT_TOLERANCE * c.min(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvddModel {
    pub alpha: Array1<f64>,
    pub c: f64,
    pub radius_sq: f64,
    /// Training representation, one sample per row.
    pub train_data: Array2<f64>,
    /// Final dual objective.
    pub objective: f64,
    /// Cached `αᵀKα`.
    alpha_k_alpha: f64,
    pub iterations: usize,
    pub converged: bool,
    #[serde(skip)]
    pub trace: Vec<f64>,
}

pub fn solve_svdd(data: ArrayView2<'_, f64>, c: f64) -> Result<SvddModel> {
    solve_svdd_with(data, c, &SmoOptions::default())
}

pub fn solve_svdd_with(data: ArrayView2<'_, f64>, c: f64, opts: &SmoOptions) -> Result<SvddModel> {
    let n = data.nrows();
    if n == 0 {
        return Err(OccError::EmptyDataset);
    }
    if !(c.is_finite() && c * n as f64 >= 1.0 - 1e-12) {
        return Err(OccError::InfeasibleC { c, n });
    }
    check_finite_view(data)?;

    let gram = data.dot(&data.t());
    let diag = gram.diag().to_owned();
    let h = &gram * 2.0;
    let p = -&diag;
    let sol = smo::solve(h.view(), p.view(), c, opts)?;

    let alpha = sol.alpha;
    let alpha_k_alpha = alpha.dot(&gram.dot(&alpha));
    // ‖z_i − a‖² = K_ii − 2(Kα)_i + αᵀKα and (Kα)_i = (g_i + K_ii)/2
    let dist: Array1<f64> = sol.gradient.mapv(|g| alpha_k_alpha - g);
    let radius_sq = radius_from(&alpha, &dist, c);

    Ok(SvddModel {
        alpha,
        c,
        radius_sq,
        train_data: data.to_owned(),
        objective: -sol.objective,
        alpha_k_alpha,
        iterations: sol.iterations,
        converged: sol.converged,
        trace: sol.trace.iter().map(|f| -f).collect(),
    })
}

/// Mean squared center distance over free support vectors, or the largest
/// distance among α > 0 when every multiplier sits at a bound.
fn radius_from(alpha: &Array1<f64>, dist: &Array1<f64>, c: f64) -> f64 {
    let tol = bound_tolerance(c);
    let free: Vec<f64> = alpha
        .iter()
        .zip(dist.iter())
        .filter(|(&a, _)| a > tol && a < c - tol)
        .map(|(_, &d)| d)
        .collect();
    let r2 = if free.is_empty() {
        alpha
            .iter()
            .zip(dist.iter())
            .filter(|(&a, _)| a > tol)
            .map(|(_, &d)| d)
            .fold(0.0, f64::max)
    } else {
        free.iter().sum::<f64>() / free.len() as f64
    };
    r2.max(0.0)
}

impl SvddModel {
    pub fn dim(&self) -> usize {
        self.train_data.ncols()
    }

    pub fn center(&self) -> Array1<f64> {
        self.train_data.t().dot(&self.alpha)
    }

    /// `‖z − a‖²` through the dual expansion.
    pub fn distance_sq_to_center(&self, sample: ArrayView1<'_, f64>) -> Result<f64> {
        if sample.len() != self.dim() {
            return Err(OccError::DimensionMismatch {
                expected: self.dim(),
                found: sample.len(),
            });
        }
        let cross = self.train_data.dot(&sample).dot(&self.alpha);
        Ok(sample.dot(&sample) - 2.0 * cross + self.alpha_k_alpha)
    }

    /// Score `R² − ‖z − a‖²`; the boundary counts as target.
    pub fn classify(&self, sample: ArrayView1<'_, f64>) -> Result<Decision> {
        let score = self.radius_sq - self.distance_sq_to_center(sample)?;
        Ok(Decision::from_score(score))
    }

    /// Training distances to the center.
    pub fn training_distances(&self) -> Array1<f64> {
        self.train_data
            .outer_iter()
            .map(|z| self.distance_sq_to_center(z).expect("own dimension"))
            .collect()
    }

    /// Indices with `α_i` at the upper bound.
    pub fn bounded_support(&self) -> Vec<usize> {
        let tol = bound_tolerance(self.c);
        (0..self.alpha.len())
            .filter(|&i| self.alpha[i] >= self.c - tol)
            .collect()
    }
}
