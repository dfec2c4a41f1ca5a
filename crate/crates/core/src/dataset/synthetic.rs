//! Generated benchmark data with known geometry.

use std::f64::consts::PI;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{Dataset, Label};

/// Targets drawn from two isotropic Gaussians centered at (±2, 0) with
/// std 0.5; outliers on a noisy ring of radius 5 around both. Targets come
/// first, then outliers.
pub fn blobs_with_ring(n_target: usize, n_outlier: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let blob = Normal::new(0.0, 0.5).unwrap();
    let ring = Normal::new(5.0, 0.3).unwrap();
    let n = n_target + n_outlier;
    let mut features = Array2::zeros((n, 2));
    for i in 0..n_target {
        let cx = if i % 2 == 0 { -2.0 } else { 2.0 };
        features[[i, 0]] = cx + blob.sample(&mut rng);
        features[[i, 1]] = blob.sample(&mut rng);
    }
    for i in n_target..n {
        let theta = rng.random_range(0.0..2.0 * PI);
        let r = ring.sample(&mut rng);
        features[[i, 0]] = r * theta.cos();
        features[[i, 1]] = r * theta.sin();
    }
    let mut labels = vec![Label::Target; n_target];
    labels.extend(std::iter::repeat_n(Label::Outlier, n_outlier));
    Dataset::new(features, labels, vec!["x".into(), "y".into()]).expect("finite by construction")
}

/// `n` points from a standard normal in `dim` dimensions.
pub fn gaussian_matrix(n: usize, dim: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    Array2::from_shape_fn((n, dim), |_| normal.sample(&mut rng))
}
