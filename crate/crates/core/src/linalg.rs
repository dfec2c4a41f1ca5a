//! Dense helpers on top of nalgebra for the few factorizations we need.

use nalgebra::DMatrix;
use ndarray::{Array1, Array2, ArrayView2};

fn to_na(m: ArrayView2<'_, f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[[i, j]])
}

fn from_na(m: &DMatrix<f64>) -> Array2<f64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

/// Eigendecomposition of a symmetric matrix, eigenvalues in descending order.
/// Eigenvectors are the columns of the returned matrix.
pub fn symmetric_eigen(m: ArrayView2<'_, f64>) -> (Array1<f64>, Array2<f64>) {
    let n = m.nrows();
    // symmetrize first so round-off asymmetry cannot leak in
    let sym = DMatrix::from_fn(n, n, |i, j| 0.5 * (m[[i, j]] + m[[j, i]]));
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });
    let vals = Array1::from_iter(order.iter().map(|&k| eig.eigenvalues[k]));
    let vecs = Array2::from_shape_fn((n, n), |(i, c)| eig.eigenvectors[(i, order[c])]);
    (vals, vecs)
}

/// Orthonormalizes the rows of a d×D matrix (d ≤ D) by a thin QR of its
/// transpose. Signs are chosen so that R has a non-negative diagonal, which
/// makes the map the identity on matrices that already have orthonormal rows.
pub fn orthonormalize_rows(q: ArrayView2<'_, f64>) -> Array2<f64> {
    let qr = to_na(q.t()).qr();
    let mut basis = qr.q();
    let r = qr.r();
    for c in 0..basis.ncols() {
        if r[(c, c)] < 0.0 {
            basis.column_mut(c).neg_mut();
        }
    }
    from_na(&basis).reversed_axes()
}

/// Squared Euclidean distances between the rows of `a` and the rows of `b`.
pub fn squared_distances(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> Array2<f64> {
    let mut out = Array2::zeros((a.nrows(), b.nrows()));
    for (i, ra) in a.outer_iter().enumerate() {
        for (j, rb) in b.outer_iter().enumerate() {
            out[[i, j]] = ra
                .iter()
                .zip(rb.iter())
                .map(|(x, y)| (x - y) * (x - y))
                .sum();
        }
    }
    out
}

/// Largest absolute entry of `m - I`.
pub fn identity_deviation(m: ArrayView2<'_, f64>) -> f64 {
    m.indexed_iter()
        .map(|((i, j), v)| (v - if i == j { 1.0 } else { 0.0 }).abs())
        .fold(0.0, f64::max)
}
