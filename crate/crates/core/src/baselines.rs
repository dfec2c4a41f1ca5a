//! ν-parameterized one-class SVM (hyperplane separating the data from the
//! origin), solved with the same SMO machinery as SVDD:
//!
//! ```text
//! minimize ½ Σ_ij α_i α_j z_iᵀz_j   s.t. 0 ≤ α_i ≤ 1/(νN), Σ α_i = 1
//! ```

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, OccError, Result};
use crate::smo::{self, SmoOptions};
use crate::svdd::bound_tolerance;
use crate::{check_finite_view, Decision};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OcsvmModel {
    pub alpha: Array1<f64>,
    pub nu: f64,
    pub rho: f64,
    pub train_data: Array2<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub fn solve_ocsvm(data: ArrayView2<'_, f64>, nu: f64) -> Result<OcsvmModel> {
    solve_ocsvm_with(data, nu, &SmoOptions::default())
}

pub fn solve_ocsvm_with(
    data: ArrayView2<'_, f64>,
    nu: f64,
    opts: &SmoOptions,
) -> Result<OcsvmModel> {
    let n = data.nrows();
    if n == 0 {
        return Err(OccError::EmptyDataset);
    }
    if !(nu > 0.0 && nu <= 1.0) {
        return Err(invalid("nu", format!("{nu} is not in (0, 1]")));
    }
    check_finite_view(data)?;
    let upper = 1.0 / (nu * n as f64);
    let gram = data.dot(&data.t());
    let p = Array1::zeros(n);
    let sol = smo::solve(gram.view(), p.view(), upper, opts)?;
    let rho = offset(&sol.alpha, &sol.gradient, upper);
    Ok(OcsvmModel {
        alpha: sol.alpha,
        nu,
        rho,
        train_data: data.to_owned(),
        objective: sol.objective,
        iterations: sol.iterations,
        converged: sol.converged,
    })
}

/// ρ is the shared value of `(Kα)_i` on free support vectors. Without free
/// vectors it is the midpoint of the interval allowed by the KKT conditions.
fn offset(alpha: &Array1<f64>, gradient: &Array1<f64>, upper: f64) -> f64 {
    let tol = bound_tolerance(upper);
    let mut free_sum = 0.0;
    let mut free_count = 0usize;
    let mut lower_bound = f64::NEG_INFINITY;
    let mut upper_bound = f64::INFINITY;
    for (&a, &g) in alpha.iter().zip(gradient.iter()) {
        if a >= upper - tol {
            lower_bound = lower_bound.max(g);
        } else if a <= tol {
            upper_bound = upper_bound.min(g);
        } else {
            free_sum += g;
            free_count += 1;
        }
    }
    if free_count > 0 {
        free_sum / free_count as f64
    } else if lower_bound.is_finite() && upper_bound.is_finite() {
        0.5 * (lower_bound + upper_bound)
    } else if lower_bound.is_finite() {
        lower_bound
    } else {
        upper_bound
    }
}

impl OcsvmModel {
    pub fn dim(&self) -> usize {
        self.train_data.ncols()
    }

    pub fn upper_bound(&self) -> f64 {
        1.0 / (self.nu * self.alpha.len() as f64)
    }

    /// Score `Σ α_i z_iᵀz − ρ`; target iff the score is non-negative.
    pub fn classify(&self, sample: ArrayView1<'_, f64>) -> Result<Decision> {
        if sample.len() != self.dim() {
            return Err(OccError::DimensionMismatch {
                expected: self.dim(),
                found: sample.len(),
            });
        }
        let score = self.train_data.dot(&sample).dot(&self.alpha) - self.rho;
        Ok(Decision::from_score(score))
    }
}

pub fn classify_ocsvm(model: &OcsvmModel, sample: ArrayView1<'_, f64>) -> Result<Decision> {
    model.classify(sample)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::synthetic::gaussian_matrix;
    use ndarray::array;

    #[test]
    fn single_point() {
        let m = solve_ocsvm(array![[1.0, 2.0]].view(), 0.5).unwrap();
        assert_eq!(m.alpha, array![1.0]);
        let d = m.classify(array![1.0, 2.0].view()).unwrap();
        assert!(d.label.is_target());
    }

    #[test]
    fn nu_one_is_uniform() {
        let data = gaussian_matrix(7, 2, 5);
        let m = solve_ocsvm(data.view(), 1.0).unwrap();
        for a in m.alpha.iter() {
            assert!((a - 1.0 / 7.0).abs() < 1e-12);
        }
    }

    #[test]
    fn free_vectors_score_zero() {
        let data = gaussian_matrix(12, 3, 8) + 3.0;
        let m = solve_ocsvm(data.view(), 0.3).unwrap();
        let tol = bound_tolerance(m.upper_bound());
        let mut saw_free = false;
        for (i, &a) in m.alpha.iter().enumerate() {
            if a > tol && a < m.upper_bound() - tol {
                saw_free = true;
                assert!(m.classify(data.row(i)).unwrap().score.abs() < 1e-6);
            }
        }
        assert!(saw_free);
    }

    #[test]
    fn origin_scores_minus_rho_and_far_copy_is_positive() {
        let data = gaussian_matrix(10, 2, 1) + 4.0;
        let m = solve_ocsvm(data.view(), 0.2).unwrap();
        let origin = m.classify(array![0.0, 0.0].view()).unwrap();
        assert!((origin.score + m.rho).abs() < 1e-15);
        let sv = m.alpha.iter().position(|&a| a > 1e-6).unwrap();
        let far = data.row(sv).to_owned() * 10.0;
        assert!(m.classify(far.view()).unwrap().label.is_target());
    }

    #[test]
    fn invalid_nu() {
        let data = gaussian_matrix(3, 2, 1);
        assert!(solve_ocsvm(data.view(), 0.0).is_err());
        assert!(solve_ocsvm(data.view(), 1.5).is_err());
    }
}
