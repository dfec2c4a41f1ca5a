use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Result of a k-means run. Cluster indices are zero-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    pub centroids: Array2<f64>,
    pub assignments: Vec<usize>,
    pub seed: u64,
    pub iterations: usize,
}

impl ClusterModel {
    pub fn n_clusters(&self) -> usize {
        self.centroids.nrows()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_clusters()];
        for &a in &self.assignments {
            sizes[a] += 1;
        }
        sizes
    }

    /// Sum of squared distances from each point to its centroid.
    pub fn objective(&self, data: ArrayView2<'_, f64>) -> f64 {
        data.outer_iter()
            .zip(&self.assignments)
            .map(|(x, &c)| sq_dist(x, self.centroids.row(c)))
            .sum()
    }
}

fn sq_dist(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(x: ArrayView1<'_, f64>, centroids: &Array2<f64>) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, mu) in centroids.outer_iter().enumerate() {
        let d = sq_dist(x, mu);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn seed_centroids(data: ArrayView2<'_, f64>, k: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let n = data.nrows();
    let mut chosen = vec![rng.random_range(0..n)];
    let mut dist: Vec<f64> = data
        .outer_iter()
        .map(|x| sq_dist(x, data.row(chosen[0])))
        .collect();
    while chosen.len() < k {
        let total: f64 = dist.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &d) in dist.iter().enumerate() {
                if d > 0.0 && target < d {
                    pick = i;
                    break;
                }
                target -= d;
            }
            // guard against the tail landing on a zero-weight point
            if dist[pick] == 0.0 {
                pick = dist.iter().rposition(|&d| d > 0.0).unwrap();
            }
            pick
        } else {
            (0..n).find(|i| !chosen.contains(i)).unwrap()
        };
        chosen.push(next);
        for (i, x) in data.outer_iter().enumerate() {
            dist[i] = dist[i].min(sq_dist(x, data.row(next)));
        }
    }
    data.select(Axis(0), &chosen)
}

/// Moves points into empty clusters: the farthest member of the currently
/// largest cluster is reassigned until every cluster is populated.
fn repair_empty(data: ArrayView2<'_, f64>, assignments: &mut [usize], centroids: &mut Array2<f64>) {
    let k = centroids.nrows();
    loop {
        let mut sizes = vec![0usize; k];
        for &a in assignments.iter() {
            sizes[a] += 1;
        }
        let Some(empty) = sizes.iter().position(|&s| s == 0) else {
            return;
        };
        let largest = (0..k)
            .max_by(|&a, &b| sizes[a].cmp(&sizes[b]).then(b.cmp(&a)))
            .unwrap();
        let mut far = (usize::MAX, -1.0);
        for (i, x) in data.outer_iter().enumerate() {
            if assignments[i] == largest {
                let d = sq_dist(x, centroids.row(largest));
                if d > far.1 {
                    far = (i, d);
                }
            }
        }
        assignments[far.0] = empty;
        centroids.row_mut(empty).assign(&data.row(far.0));
    }
}

fn update_centroids(data: ArrayView2<'_, f64>, assignments: &[usize], centroids: &mut Array2<f64>) {
    let mut counts = vec![0usize; centroids.nrows()];
    centroids.fill(0.0);
    for (x, &c) in data.outer_iter().zip(assignments) {
        let mut row = centroids.row_mut(c);
        row += &x;
        counts[c] += 1;
    }
    for (mut row, &n) in centroids.outer_iter_mut().zip(&counts) {
        row /= n as f64;
    }
}

/// Lloyd's algorithm with k-means++ seeding. Stops when assignments repeat
/// or after `max_iters` update rounds.
pub fn kmeans(
    data: ArrayView2<'_, f64>,
    n_clusters: usize,
    seed: u64,
    max_iters: usize,
) -> Result<ClusterModel> {
    let n = data.nrows();
    if n_clusters == 0 || n_clusters > n {
        return Err(invalid(
            "n_clusters",
            format!("{n_clusters} clusters requested for {n} points"),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = seed_centroids(data, n_clusters, &mut rng);
    let mut assignments: Vec<usize> = data
        .outer_iter()
        .map(|x| nearest(x, &centroids).0)
        .collect();
    repair_empty(data, &mut assignments, &mut centroids);

    let mut iterations = 0;
    while iterations < max_iters {
        update_centroids(data, &assignments, &mut centroids);
        iterations += 1;
        let mut next: Vec<usize> = data
            .outer_iter()
            .map(|x| nearest(x, &centroids).0)
            .collect();
        repair_empty(data, &mut next, &mut centroids);
        if next == assignments {
            break;
        }
        assignments = next;
    }
    update_centroids(data, &assignments, &mut centroids);

    Ok(ClusterModel {
        centroids,
        assignments,
        seed,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::synthetic::gaussian_matrix;
    use ndarray::{array, Array1};

    fn brute_force_two_partition(data: ArrayView2<'_, f64>) -> f64 {
        let n = data.nrows();
        let mut best = f64::INFINITY;
        for mask in 1u32..(1 << n) - 1 {
            let mut sse = 0.0;
            for side in [true, false] {
                let idx: Vec<usize> = (0..n).filter(|&i| ((mask >> i) & 1 == 1) == side).collect();
                let part = data.select(Axis(0), &idx);
                let mu = part.mean_axis(Axis(0)).unwrap();
                sse += part
                    .outer_iter()
                    .map(|x| sq_dist(x, mu.view()))
                    .sum::<f64>();
            }
            best = best.min(sse);
        }
        best
    }

    #[test]
    fn single_cluster_is_mean() {
        let data = gaussian_matrix(9, 3, 1);
        let model = kmeans(data.view(), 1, 0, 50).unwrap();
        assert!(model.assignments.iter().all(|&a| a == 0));
        let mean: Array1<f64> = data.mean_axis(Axis(0)).unwrap();
        for (a, b) in model.centroids.row(0).iter().zip(mean.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn two_blobs_match_brute_force() {
        let data = array![
            [0.0, 0.0],
            [0.3, 0.1],
            [-0.2, 0.2],
            [0.1, -0.3],
            [10.0, 10.0],
            [10.2, 9.9],
            [9.8, 10.1],
            [10.1, 10.3]
        ];
        for seed in 0..5 {
            let model = kmeans(data.view(), 2, seed, 100).unwrap();
            let a = &model.assignments;
            assert!(a[..4].iter().all(|&c| c == a[0]));
            assert!(a[4..].iter().all(|&c| c == a[4]));
            assert_ne!(a[0], a[4]);
            let oracle = brute_force_two_partition(data.view());
            assert!((model.objective(data.view()) - oracle).abs() < 1e-10);
        }
    }

    #[test]
    fn one_cluster_per_point() {
        let data = gaussian_matrix(6, 2, 4);
        let model = kmeans(data.view(), 6, 9, 100).unwrap();
        let mut a = model.assignments.clone();
        a.sort_unstable();
        assert_eq!(a, (0..6).collect::<Vec<_>>());
        assert!(model.objective(data.view()) < 1e-20);
    }

    #[test]
    fn duplicates_still_fill_every_cluster() {
        let data = array![[1.0, 1.0], [1.0, 1.0], [1.0, 1.0], [2.0, 2.0]];
        let model = kmeans(data.view(), 3, 0, 20).unwrap();
        assert!(model.sizes().iter().all(|&s| s > 0));
    }

    #[test]
    fn too_many_clusters() {
        let data = gaussian_matrix(3, 2, 0);
        assert!(kmeans(data.view(), 4, 0, 10).is_err());
        assert!(kmeans(data.view(), 0, 0, 10).is_err());
    }

    #[test]
    fn deterministic_for_seed() {
        let data = gaussian_matrix(40, 3, 2);
        let a = kmeans(data.view(), 4, 11, 100).unwrap();
        let b = kmeans(data.view(), 4, 11, 100).unwrap();
        assert_eq!(a, b);
    }
}
