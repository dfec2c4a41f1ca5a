//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| rng.random_range(-scale..scale))
}

/// Gram matrix by explicit loops.
pub fn gram(x: ArrayView2<'_, f64>) -> Array2<f64> {
    let n = x.nrows();
    let mut k = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for c in 0..x.ncols() {
                s += x[[i, c]] * x[[j, c]];
            }
            k[[i, j]] = s;
        }
    }
    k
}

/// Euclidean projection onto `{0 ≤ a_i ≤ upper, Σ a_i = 1}` by bisection on
/// the shift τ in `a_i = clip(v_i − τ, 0, upper)`.
pub fn project_capped_simplex(v: &[f64], upper: f64, out: &mut [f64]) {
    let mass = |tau: f64| v.iter().map(|&x| (x - tau).clamp(0.0, upper)).sum::<f64>();
    let mut lo = v.iter().cloned().fold(f64::INFINITY, f64::min) - upper - 1.0;
    let mut hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 1.0;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if mass(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let tau = 0.5 * (lo + hi);
    for (o, &x) in out.iter_mut().zip(v) {
        *o = (x - tau).clamp(0.0, upper);
    }
}

/// Minimizes `½ aᵀHa + pᵀa` over the capped simplex with accelerated
/// projected gradient and adaptive restart.
pub fn capped_simplex_qp(
    h: &Array2<f64>,
    p: &Array1<f64>,
    upper: f64,
    iters: usize,
) -> Array1<f64> {
    let n = p.len();
    let hv: Vec<f64> = h.iter().cloned().collect();
    let pv: Vec<f64> = p.to_vec();
    // ‖H‖_F bounds the largest eigenvalue
    let lip = hv.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
    let step = 1.0 / lip;
    let f = |a: &[f64]| {
        let mut s = 0.0;
        for i in 0..n {
            let mut hi = 0.0;
            for j in 0..n {
                hi += hv[i * n + j] * a[j];
            }
            s += a[i] * (0.5 * hi + pv[i]);
        }
        s
    };
    let mut x = vec![0.0; n];
    project_capped_simplex(&vec![1.0 / n as f64; n], upper, &mut x);
    let mut y = x.clone();
    let mut next = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut t = 1.0f64;
    let mut fx = f(&x);
    for _ in 0..iters {
        for i in 0..n {
            let mut g = pv[i];
            for j in 0..n {
                g += hv[i * n + j] * y[j];
            }
            trial[i] = y[i] - step * g;
        }
        project_capped_simplex(&trial, upper, &mut next);
        let f_next = f(&next);
        if f_next > fx {
            if t == 1.0 {
                // a plain projected step no longer descends
                break;
            }
            // restart momentum
            t = 1.0;
            y.copy_from_slice(&x);
            continue;
        }
        let moved = next
            .iter()
            .zip(&x)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let w = (t - 1.0) / t_next;
        for i in 0..n {
            y[i] = next[i] + w * (next[i] - x[i]);
        }
        x.copy_from_slice(&next);
        fx = f_next;
        t = t_next;
        if moved < 1e-14 {
            break;
        }
    }
    Array1::from(x)
}

/// SVDD dual value `Σ a_i K_ii − aᵀKa`.
pub fn svdd_dual(k: &Array2<f64>, a: &Array1<f64>) -> f64 {
    k.diag().dot(a) - a.dot(&k.dot(a))
}

/// Oracle SVDD multipliers for row-sample data.
pub fn svdd_oracle(x: ArrayView2<'_, f64>, c: f64) -> Array1<f64> {
    let k = gram(x);
    capped_simplex_qp(&(&k * 2.0), &(-&k.diag().to_owned()), c, 60_000)
}

/// Oracle OCSVM multipliers (box bound `1/(νN)`).
pub fn ocsvm_oracle(x: ArrayView2<'_, f64>, nu: f64) -> Array1<f64> {
    let k = gram(x);
    let upper = 1.0 / (nu * x.nrows() as f64);
    capped_simplex_qp(&k, &Array1::zeros(x.nrows()), upper, 60_000)
}

/// `Σ α‖Qx‖² − ‖Σ αQx‖² + β Tr(Z Λ Zᵀ)`, spelled out sample by sample.
pub fn lagrangian_loops(
    q: ArrayView2<'_, f64>,
    x: ArrayView2<'_, f64>,
    alpha: ArrayView1<'_, f64>,
    lambda: ArrayView2<'_, f64>,
    beta: f64,
) -> f64 {
    let n = x.nrows();
    let d = q.nrows();
    let z: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..d)
                .map(|r| (0..x.ncols()).map(|c| q[[r, c]] * x[[i, c]]).sum())
                .collect()
        })
        .collect();
    let mut spread = 0.0;
    let mut center = vec![0.0; d];
    for i in 0..n {
        spread += alpha[i] * z[i].iter().map(|v| v * v).sum::<f64>();
        for r in 0..d {
            center[r] += alpha[i] * z[i][r];
        }
    }
    let mut reg = 0.0;
    for i in 0..n {
        for j in 0..n {
            let dot: f64 = (0..d).map(|r| z[i][r] * z[j][r]).sum();
            reg += lambda[[i, j]] * dot;
        }
    }
    spread - center.iter().map(|v| v * v).sum::<f64>() + beta * reg
}

/// Central finite differences of `f` at `q`, entry by entry.
pub fn finite_difference(
    q: &Array2<f64>,
    step: f64,
    f: impl Fn(&Array2<f64>) -> f64,
) -> Array2<f64> {
    let mut out = Array2::zeros(q.raw_dim());
    for idx in 0..q.len() {
        let (r, c) = (idx / q.ncols(), idx % q.ncols());
        let mut plus = q.clone();
        plus[[r, c]] += step;
        let mut minus = q.clone();
        minus[[r, c]] -= step;
        out[[r, c]] = (f(&plus) - f(&minus)) / (2.0 * step);
    }
    out
}

/// Largest elementwise relative error, with denominators floored at
/// `1e-3 · max|reference|` so that near-zero entries are judged against the
/// gradient's overall scale.
pub fn max_relative_error(value: &Array2<f64>, reference: &Array2<f64>) -> f64 {
    let scale = reference.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = (1e-3 * scale).max(1e-300);
    value
        .iter()
        .zip(reference.iter())
        .map(|(a, b)| (a - b).abs() / a.abs().max(b.abs()).max(floor))
        .fold(0.0, f64::max)
}

pub fn sq_dist(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Symmetric kNN adjacency by brute force: `i ~ j` when either is among the
/// other's `k` nearest (ties to the lower index).
pub fn knn_adjacency_brute(x: ArrayView2<'_, f64>, k: usize) -> Array2<f64> {
    let n = x.nrows();
    let mut a = Array2::zeros((n, n));
    for i in 0..n {
        let mut others: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| (sq_dist(x.row(i), x.row(j)), j))
            .collect();
        others.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap().then(p.1.cmp(&q.1)));
        for &(_, j) in others.iter().take(k) {
            a[[i, j]] = 1.0;
            a[[j, i]] = 1.0;
        }
    }
    a
}

/// Columns of `y` (d×N) are projected samples.
pub fn pairwise_weighted_sum(y: ArrayView2<'_, f64>, a: ArrayView2<'_, f64>) -> f64 {
    let n = y.ncols();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += a[[i, j]] * sq_dist(y.column(i), y.column(j));
        }
    }
    s
}

fn cluster_means(
    y: ArrayView2<'_, f64>,
    assign: &[usize],
    n_clusters: usize,
) -> (Vec<Array1<f64>>, Vec<usize>) {
    let mut means = vec![Array1::zeros(y.nrows()); n_clusters];
    let mut counts = vec![0usize; n_clusters];
    for (i, &c) in assign.iter().enumerate() {
        means[c] = &means[c] + &y.column(i);
        counts[c] += 1;
    }
    for (m, &cnt) in means.iter_mut().zip(&counts) {
        if cnt > 0 {
            *m /= cnt as f64;
        }
    }
    (means, counts)
}

pub fn within_scatter(y: ArrayView2<'_, f64>, assign: &[usize], n_clusters: usize) -> f64 {
    let (means, _) = cluster_means(y, assign, n_clusters);
    assign
        .iter()
        .enumerate()
        .map(|(i, &c)| sq_dist(y.column(i), means[c].view()))
        .sum()
}

pub fn between_scatter(y: ArrayView2<'_, f64>, assign: &[usize], n_clusters: usize) -> f64 {
    let (means, counts) = cluster_means(y, assign, n_clusters);
    let n = y.ncols() as f64;
    let mut mu = Array1::zeros(y.nrows());
    for i in 0..y.ncols() {
        mu = &mu + &y.column(i);
    }
    mu /= n;
    means
        .iter()
        .zip(&counts)
        .map(|(m, &cnt)| cnt as f64 * sq_dist(m.view(), mu.view()))
        .sum()
}

pub fn trace_form(y: ArrayView2<'_, f64>, l: ArrayView2<'_, f64>) -> f64 {
    y.dot(&l).dot(&y.t()).diag().sum()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}
