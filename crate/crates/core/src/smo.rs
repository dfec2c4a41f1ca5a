//! Two-coordinate ascent for the box-and-simplex constrained quadratic
//! programs behind SVDD and the one-class SVM:
//!
//! ```text
//! minimize   ½ αᵀHα + pᵀα
//! subject to 0 ≤ α_i ≤ u,  Σ α_i = 1
//! ```
//!
//! Each step picks the maximal violating pair (the coordinate with the
//! smallest gradient that can still grow and the one with the largest
//! gradient that can still shrink) and solves the two-variable subproblem
//! exactly.

use ndarray::{Array1, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoOptions {
    /// Stop once the maximal KKT violation drops below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Record the objective after every step.
    pub record_trace: bool,
}

impl Default for SmoOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 10_000,
            record_trace: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SmoSolution {
    pub alpha: Array1<f64>,
    /// `Hα + p` at the returned α.
    pub gradient: Array1<f64>,
    /// Value of the minimized objective.
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub max_violation: f64,
    pub trace: Vec<f64>,
}

fn objective(alpha: &Array1<f64>, gradient: &Array1<f64>, p: ArrayView1<'_, f64>) -> f64 {
    // ½αᵀHα + pᵀα = ½ Σ α_i (g_i + p_i)
    0.5 * alpha
        .iter()
        .zip(gradient.iter().zip(p.iter()))
        .map(|(a, (g, q))| a * (g + q))
        .sum::<f64>()
}

/// Maximal violating pair `(i, j, g_j − g_i)`; `i` may grow, `j` may shrink.
fn select_pair(
    alpha: &Array1<f64>,
    gradient: &Array1<f64>,
    upper: f64,
) -> Option<(usize, usize, f64)> {
    let mut up: Option<usize> = None;
    let mut down: Option<usize> = None;
    for (k, (&a, &g)) in alpha.iter().zip(gradient.iter()).enumerate() {
        if a < upper && up.is_none_or(|i| g < gradient[i]) {
            up = Some(k);
        }
        if a > 0.0 && down.is_none_or(|j| g > gradient[j]) {
            down = Some(k);
        }
    }
    let (i, j) = (up?, down?);
    Some((i, j, gradient[j] - gradient[i]))
}

pub fn solve(
    h: ArrayView2<'_, f64>,
    p: ArrayView1<'_, f64>,
    upper: f64,
    opts: &SmoOptions,
) -> Result<SmoSolution> {
    let n = p.len();
    if n == 0 {
        return Err(crate::OccError::EmptyDataset);
    }
    if h.dim() != (n, n) {
        return Err(crate::OccError::DimensionMismatch {
            expected: n,
            found: h.nrows(),
        });
    }
    if !(upper > 0.0) || (n as f64) * upper < 1.0 - 1e-12 {
        return Err(invalid(
            "upper",
            format!("box bound {upper} cannot satisfy Σα = 1 with N = {n}"),
        ));
    }

    let mut alpha = Array1::zeros(n);
    let mut remaining = 1.0f64;
    for a in alpha.iter_mut() {
        if remaining <= 0.0 {
            break;
        }
        let v = upper.min(remaining);
        *a = v;
        remaining -= v;
    }
    let mut gradient = h.dot(&alpha) + p;

    let mut trace = Vec::new();
    if opts.record_trace {
        trace.push(objective(&alpha, &gradient, p));
    }

    let mut iterations = 0;
    let mut converged = false;
    let mut max_violation = f64::INFINITY;
    while iterations < opts.max_iter {
        let Some((i, j, violation)) = select_pair(&alpha, &gradient, upper) else {
            // only possible with a single coordinate pinned at 1
            converged = true;
            max_violation = 0.0;
            break;
        };
        max_violation = violation;
        if violation < opts.tol {
            converged = true;
            break;
        }
        let curvature = (h[[i, i]] + h[[j, j]] - 2.0 * h[[i, j]]).max(1e-12);
        let room_i = upper - alpha[i];
        let room_j = alpha[j];
        let step = violation / curvature;
        let delta = step.min(room_i).min(room_j);
        if delta == room_i {
            alpha[i] = upper;
        } else {
            alpha[i] += delta;
        }
        if delta == room_j {
            alpha[j] = 0.0;
        } else {
            alpha[j] -= delta;
        }
        for k in 0..n {
            gradient[k] += delta * (h[[k, i]] - h[[k, j]]);
        }
        iterations += 1;
        if opts.record_trace {
            trace.push(objective(&alpha, &gradient, p));
        }
    }
    if !converged {
        if let Some((_, _, v)) = select_pair(&alpha, &gradient, upper) {
            max_violation = v;
        }
        log::debug!("SMO hit the iteration cap with KKT violation {max_violation:e}");
    }

    let objective = objective(&alpha, &gradient, p);
    Ok(SmoSolution {
        alpha,
        gradient,
        objective,
        iterations,
        converged,
        max_violation,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn trace_is_monotone() {
        let h = array![[2.0, 0.5, 0.1], [0.5, 1.0, 0.2], [0.1, 0.2, 3.0]];
        let p = array![-1.0, 0.3, -2.0];
        let opts = SmoOptions {
            record_trace: true,
            tol: 1e-12,
            ..Default::default()
        };
        let sol = solve(h.view(), p.view(), 0.6, &opts).unwrap();
        assert!(sol.converged);
        for w in sol.trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-15);
        }
        assert!((sol.alpha.sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_box() {
        let h = ndarray::Array2::eye(3);
        let p = Array1::zeros(3);
        assert!(solve(h.view(), p.view(), 0.3, &SmoOptions::default()).is_err());
        assert!(solve(h.view(), p.view(), 1.0 / 3.0, &SmoOptions::default()).is_ok());
    }
}
