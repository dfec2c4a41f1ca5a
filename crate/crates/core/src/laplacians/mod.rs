//! Graph Laplacians for the graph regularizer and λ selection vectors for
//! the variance regularizers.
//!
//! Every regularizer in the toolkit has the form `Tr(Q X Λ Xᵀ Qᵀ)` for some
//! symmetric PSD N×N matrix Λ. The graph variants use a Laplacian
//! (kNN, within-cluster or between-cluster); the variance variants use the
//! rank-one matrix `λλᵀ`.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, OccError, Result};
use crate::linalg::squared_distances;

mod kmeans;

pub use kmeans::{kmeans, ClusterModel};

/// Which graph a Laplacian encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaplacianKind {
    Knn {
        k: usize,
    },
    WithinCluster {
        n_clusters: usize,
    },
    BetweenCluster {
        n_clusters: usize,
    },
    /// Supplied by the caller.
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaplacianMatrix {
    pub matrix: Array2<f64>,
    pub kind: LaplacianKind,
    pub cluster_assignments: Option<Vec<usize>>,
}

impl LaplacianMatrix {
    /// Wraps a caller-provided symmetric matrix.
    pub fn custom(matrix: Array2<f64>) -> Result<Self> {
        let n = matrix.nrows();
        if matrix.ncols() != n {
            return Err(OccError::DimensionMismatch {
                expected: n,
                found: matrix.ncols(),
            });
        }
        for i in 0..n {
            for j in 0..i {
                if (matrix[[i, j]] - matrix[[j, i]]).abs() > 1e-12 {
                    return Err(invalid("laplacian", format!("not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self {
            matrix,
            kind: LaplacianKind::Custom,
            cluster_assignments: None,
        })
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Symmetrized kNN adjacency: `A_ij = 1` iff `x_i` is among the k nearest
/// neighbours of `x_j` or vice versa. Equal distances prefer the lower index.
pub fn knn_adjacency(data: ArrayView2<'_, f64>, k: usize) -> Result<Array2<f64>> {
    let n = data.nrows();
    if k == 0 || k >= n {
        return Err(invalid(
            "k",
            format!("need 1 <= k <= N-1, got k={k} with N={n}"),
        ));
    }
    let dist = squared_distances(data, data);
    let mut adj = Array2::zeros((n, n));
    let mut order: Vec<usize> = Vec::with_capacity(n);
    for i in 0..n {
        order.clear();
        order.extend((0..n).filter(|&j| j != i));
        order.sort_by(|&a, &b| dist[[i, a]].total_cmp(&dist[[i, b]]).then(a.cmp(&b)));
        for &j in &order[..k] {
            adj[[i, j]] = 1.0;
            adj[[j, i]] = 1.0;
        }
    }
    Ok(adj)
}

/// `L = D − A` for a symmetric weight matrix with zero diagonal.
pub fn laplacian_from_adjacency(adj: ArrayView2<'_, f64>) -> Array2<f64> {
    let n = adj.nrows();
    let mut lap = adj.mapv(|w| -w);
    for i in 0..n {
        let degree: f64 = (0..n).filter(|&j| j != i).map(|j| adj[[i, j]]).sum();
        lap[[i, i]] = degree;
    }
    lap
}

pub fn knn_laplacian(data: ArrayView2<'_, f64>, k: usize) -> Result<LaplacianMatrix> {
    let adj = knn_adjacency(data, k)?;
    Ok(LaplacianMatrix {
        matrix: laplacian_from_adjacency(adj.view()),
        kind: LaplacianKind::Knn { k },
        cluster_assignments: None,
    })
}

fn cluster_members(clusters: &ClusterModel, n: usize) -> Result<Vec<Vec<usize>>> {
    if clusters.assignments.len() != n {
        return Err(OccError::DimensionMismatch {
            expected: n,
            found: clusters.assignments.len(),
        });
    }
    let mut members = vec![Vec::new(); clusters.n_clusters()];
    for (i, &c) in clusters.assignments.iter().enumerate() {
        if c >= members.len() {
            return Err(invalid(
                "assignments",
                format!("cluster index {c} out of range"),
            ));
        }
        members[c].push(i);
    }
    if let Some(c) = members.iter().position(Vec::is_empty) {
        return Err(OccError::EmptyCluster(c));
    }
    Ok(members)
}

/// `L_w = I − Σ_c (1/N_c) 1_c 1_cᵀ`.
pub fn within_cluster_laplacian(clusters: &ClusterModel, n: usize) -> Result<LaplacianMatrix> {
    let members = cluster_members(clusters, n)?;
    let mut lap = Array2::eye(n);
    for m in &members {
        let w = 1.0 / m.len() as f64;
        for &i in m {
            for &j in m {
                lap[[i, j]] -= w;
            }
        }
    }
    Ok(LaplacianMatrix {
        matrix: lap,
        kind: LaplacianKind::WithinCluster {
            n_clusters: members.len(),
        },
        cluster_assignments: Some(clusters.assignments.clone()),
    })
}

/// `L_b = Σ_c N_c (1_c/N_c − 1/N)(1_c/N_c − 1/N)ᵀ`.
pub fn between_cluster_laplacian(clusters: &ClusterModel, n: usize) -> Result<LaplacianMatrix> {
    let members = cluster_members(clusters, n)?;
    let inv_n = 1.0 / n as f64;
    let mut lap = Array2::zeros((n, n));
    let mut v = Array1::zeros(n);
    for m in &members {
        let nc = m.len() as f64;
        v.fill(-inv_n);
        for &i in m {
            v[i] += 1.0 / nc;
        }
        for i in 0..n {
            for j in 0..n {
                lap[[i, j]] += nc * v[i] * v[j];
            }
        }
    }
    Ok(LaplacianMatrix {
        matrix: lap,
        kind: LaplacianKind::BetweenCluster {
            n_clusters: members.len(),
        },
        cluster_assignments: Some(clusters.assignments.clone()),
    })
}

/// The four ways of selecting samples for the variance regularizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PsiVariant {
    /// No regularization.
    Psi1,
    /// Every training sample.
    Psi2,
    /// Samples on and outside the boundary (α > 0).
    Psi3,
    /// Boundary support vectors only (0 < α < C).
    Psi4,
}

/// Relative tolerance used to decide whether α sits at 0 or at C.
pub const SUPPORT_TOLERANCE: f64 = 1e-7;

pub fn lambda_vector(
    variant: PsiVariant,
    alpha: ArrayView1<'_, f64>,
    c: f64,
) -> Result<Array1<f64>> {
    let tol = SUPPORT_TOLERANCE * c.min(1.0);
    for (index, &value) in alpha.iter().enumerate() {
        if value < -tol || value > c + tol || !value.is_finite() {
            return Err(OccError::AlphaOutOfBox {
                index,
                value,
                upper: c,
            });
        }
    }
    Ok(match variant {
        PsiVariant::Psi1 => Array1::zeros(alpha.len()),
        PsiVariant::Psi2 => Array1::ones(alpha.len()),
        PsiVariant::Psi3 => alpha.mapv(|a| if a > tol { a } else { 0.0 }),
        PsiVariant::Psi4 => alpha.mapv(|a| if a > tol && a < c - tol { a } else { 0.0 }),
    })
}
