//! RBF kernel and the non-linear projection trick: an explicit map whose
//! Euclidean geometry equals the geometry of the centered kernel, so every
//! linear model trained on the mapped data is the kernelized model.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, OccError, Result};
use crate::linalg::{squared_distances, symmetric_eigen};

/// Eigenvalues below `RANK_TOLERANCE × largest` are discarded.
pub const RANK_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub sigma: f64,
}

impl KernelConfig {
    pub fn new(sigma: f64) -> Result<Self> {
        check_sigma(sigma)?;
        Ok(Self { sigma })
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma.is_finite() && sigma > 0.0 {
        Ok(())
    } else {
        Err(invalid(
            "sigma",
            format!("{sigma} is not a positive finite number"),
        ))
    }
}

/// `K_ij = exp(−‖a_i − b_j‖² / 2σ²)`.
pub fn rbf_kernel(
    a: ArrayView2<'_, f64>,
    b: ArrayView2<'_, f64>,
    sigma: f64,
) -> Result<Array2<f64>> {
    check_sigma(sigma)?;
    if a.ncols() != b.ncols() {
        return Err(OccError::DimensionMismatch {
            expected: a.ncols(),
            found: b.ncols(),
        });
    }
    let scale = -1.0 / (2.0 * sigma * sigma);
    Ok(squared_distances(a, b).mapv_into(|d| (d * scale).exp()))
}

/// Median of pairwise Euclidean distances between distinct rows.
pub fn median_pairwise_distance(data: ArrayView2<'_, f64>) -> f64 {
    let d = squared_distances(data, data);
    let n = data.nrows();
    let mut vals: Vec<f64> = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            vals.push(d[[i, j]].sqrt());
        }
    }
    if vals.is_empty() {
        return 1.0;
    }
    vals.sort_by(f64::total_cmp);
    let m = vals.len();
    let med = if m % 2 == 1 {
        vals[m / 2]
    } else {
        0.5 * (vals[m / 2 - 1] + vals[m / 2])
    };
    if med > 0.0 {
        med
    } else {
        1.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NptMap {
    pub train_data: Array2<f64>,
    pub sigma: f64,
    /// Retained eigenvalues of the centered kernel, descending.
    pub eigvals: Array1<f64>,
    /// N×r eigenvectors matching `eigvals`.
    pub eigvecs: Array2<f64>,
    /// Column means of the training kernel.
    pub kernel_col_means: Array1<f64>,
    /// Grand mean of the training kernel.
    pub kernel_mean: f64,
}

fn center_train_kernel(k: &Array2<f64>) -> (Array2<f64>, Array1<f64>, f64) {
    let col_means = k.mean_axis(Axis(0)).expect("non-empty");
    let total = col_means.mean().expect("non-empty");
    let mut centered = k.clone();
    let n = k.nrows();
    for i in 0..n {
        for j in 0..n {
            // K is symmetric, so row means equal column means
            centered[[i, j]] = k[[i, j]] - col_means[i] - col_means[j] + total;
        }
    }
    (centered, col_means, total)
}

pub fn fit_npt(train: ArrayView2<'_, f64>, sigma: f64) -> Result<NptMap> {
    let n = train.nrows();
    if n < 2 {
        return Err(invalid(
            "train",
            "kernel projection needs at least 2 samples",
        ));
    }
    crate::check_finite_view(train)?;
    let k = rbf_kernel(train, train, sigma)?;
    let (centered, col_means, total) = center_train_kernel(&k);
    let (vals, vecs) = symmetric_eigen(centered.view());
    let largest = vals[0];
    if !(largest > 0.0) {
        return Err(OccError::DegenerateKernel);
    }
    let r = vals
        .iter()
        .take_while(|&&v| v > RANK_TOLERANCE * largest)
        .count();
    if r == 0 {
        return Err(OccError::DegenerateKernel);
    }
    Ok(NptMap {
        train_data: train.to_owned(),
        sigma,
        eigvals: vals.slice(ndarray::s![..r]).to_owned(),
        eigvecs: vecs.slice(ndarray::s![.., ..r]).to_owned(),
        kernel_col_means: col_means,
        kernel_mean: total,
    })
}

impl NptMap {
    pub fn rank(&self) -> usize {
        self.eigvals.len()
    }

    pub fn input_dim(&self) -> usize {
        self.train_data.ncols()
    }

    /// Training representation `Φ = U_r Λ_r^{1/2}`, one row per sample.
    pub fn training_embedding(&self) -> Array2<f64> {
        let scale = self.eigvals.mapv(f64::sqrt);
        &self.eigvecs * &scale
    }

    /// Centers a cross-kernel against the cached training statistics.
    pub fn center_cross_kernel(&self, cross: &Array2<f64>) -> Array2<f64> {
        let row_means = cross.mean_axis(Axis(1)).expect("non-empty");
        let mut out = cross.clone();
        for (t, mut row) in out.outer_iter_mut().enumerate() {
            for (i, v) in row.iter_mut().enumerate() {
                *v += self.kernel_mean - row_means[t] - self.kernel_col_means[i];
            }
        }
        out
    }

    /// Out-of-sample map `φ_t = k̂_tᵀ U_r Λ_r^{−1/2}`.
    pub fn map(&self, samples: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if samples.ncols() != self.input_dim() {
            return Err(OccError::DimensionMismatch {
                expected: self.input_dim(),
                found: samples.ncols(),
            });
        }
        let cross = rbf_kernel(samples, self.train_data.view(), self.sigma)?;
        let centered = self.center_cross_kernel(&cross);
        let inv_sqrt = self.eigvals.mapv(|v| 1.0 / v.sqrt());
        Ok(centered.dot(&self.eigvecs) * &inv_sqrt)
    }
}

pub fn map_npt(map: &NptMap, samples: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    map.map(samples)
}
