//! Subspace SVDD: alternate between describing the projected data with an
//! SVDD and taking a gradient step on the projection `Q` (d×D).
//!
//! The projection is updated by descending the augmented Lagrangian
//!
//! ```text
//! L(Q) = Σ α_i x_iᵀQᵀQx_i − Σ_ij α_i α_j x_iᵀQᵀQx_j + β Tr(Q X Λ Xᵀ Qᵀ)
//! ```
//!
//! where Λ is `λλᵀ` for the variance regularizers and a graph Laplacian for
//! the graph regularizers. Rows of `Q` are re-orthonormalized after each
//! step.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, OccError, Result};
use crate::laplacians::{
    between_cluster_laplacian, kmeans, knn_laplacian, lambda_vector, within_cluster_laplacian,
    LaplacianMatrix, PsiVariant,
};
use crate::linalg::{orthonormalize_rows, symmetric_eigen};
use crate::smo::SmoOptions;
use crate::svdd::{solve_svdd_with, SvddModel};
use crate::{dataset::synthetic::gaussian_matrix, Decision};

/// Upper bound on Lloyd iterations when clustering for the cluster graphs.
pub const KMEANS_MAX_ITERS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegularizerKind {
    Psi1,
    Psi2,
    Psi3,
    Psi4,
    GammaKnn {
        k: usize,
    },
    GammaWithin {
        n_clusters: usize,
    },
    GammaBetween {
        n_clusters: usize,
    },
    /// Precomputed graph Laplacian over the training rows.
    Graph(LaplacianMatrix),
}

impl RegularizerKind {
    /// Whether Λ must be rebuilt from each iteration's α.
    pub fn depends_on_alpha(&self) -> bool {
        matches!(self, RegularizerKind::Psi3 | RegularizerKind::Psi4)
    }

    fn psi(&self) -> Option<PsiVariant> {
        match self {
            RegularizerKind::Psi1 => Some(PsiVariant::Psi1),
            RegularizerKind::Psi2 => Some(PsiVariant::Psi2),
            RegularizerKind::Psi3 => Some(PsiVariant::Psi3),
            RegularizerKind::Psi4 => Some(PsiVariant::Psi4),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularizerSpec {
    pub kind: RegularizerKind,
    pub beta: f64,
}

impl RegularizerSpec {
    pub fn new(kind: RegularizerKind, beta: f64) -> Self {
        Self { kind, beta }
    }

    pub fn none() -> Self {
        Self::new(RegularizerKind::Psi1, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionInit {
    #[default]
    Pca,
    RandomOrthonormal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SsvddConfig {
    pub c: f64,
    pub regularizer: RegularizerSpec,
    pub d: usize,
    pub eta: f64,
    pub n_iters: usize,
    pub seed: u64,
    pub init: ProjectionInit,
    pub smo: SmoOptions,
}

impl SsvddConfig {
    pub fn new(c: f64, regularizer: RegularizerSpec, d: usize, eta: f64) -> Self {
        Self {
            c,
            regularizer,
            d,
            eta,
            n_iters: 20,
            seed: 0,
            init: ProjectionInit::Pca,
            smo: SmoOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub objective: f64,
    pub radius_sq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SsvddModel {
    pub q: Array2<f64>,
    pub inner: SvddModel,
    pub regularizer: RegularizerSpec,
    pub eta: f64,
    pub d: usize,
    pub n_iters: usize,
    pub history: Vec<IterationRecord>,
}

fn check_d(d: usize, dim: usize) -> Result<()> {
    if d == 0 || d > dim {
        return Err(invalid("d", format!("need 1 <= d <= {dim}, got {d}")));
    }
    Ok(())
}

fn fix_row_signs(q: &mut Array2<f64>) {
    for mut row in q.outer_iter_mut() {
        let mut pivot = 0.0f64;
        for &v in row.iter() {
            if v.abs() > pivot.abs() {
                pivot = v;
            }
        }
        if pivot < 0.0 {
            row.mapv_inplace(|v| -v);
        }
    }
}

/// Top-`d` principal directions of `data` as rows, each with its
/// largest-magnitude entry positive.
pub fn init_projection(data: ArrayView2<'_, f64>, d: usize) -> Result<Array2<f64>> {
    check_d(d, data.ncols())?;
    if data.nrows() == 0 {
        return Err(OccError::EmptyDataset);
    }
    let mean = data.mean_axis(Axis(0)).expect("non-empty");
    let centered = &data - &mean;
    let cov = centered.t().dot(&centered) / data.nrows() as f64;
    let (_, vecs) = symmetric_eigen(cov.view());
    let mut q = vecs.slice(ndarray::s![.., ..d]).t().to_owned();
    fix_row_signs(&mut q);
    Ok(q)
}

/// Random d×D matrix with orthonormal rows.
pub fn random_projection(dim: usize, d: usize, seed: u64) -> Result<Array2<f64>> {
    check_d(d, dim)?;
    let g = gaussian_matrix(d, dim, seed);
    Ok(orthonormalize_rows(g.view()))
}

fn initial_projection(data: ArrayView2<'_, f64>, config: &SsvddConfig) -> Result<Array2<f64>> {
    match config.init {
        ProjectionInit::Pca => init_projection(data, config.d),
        ProjectionInit::RandomOrthonormal => random_projection(data.ncols(), config.d, config.seed),
    }
}

/// Λ such that the regularizer reads `Tr(Q X Λ Xᵀ Qᵀ)`.
pub fn regularizer_matrix(
    spec: &RegularizerSpec,
    data: ArrayView2<'_, f64>,
    alpha: ArrayView1<'_, f64>,
    c: f64,
    seed: u64,
) -> Result<Array2<f64>> {
    let n = data.nrows();
    if alpha.len() != n {
        return Err(OccError::DimensionMismatch {
            expected: n,
            found: alpha.len(),
        });
    }
    if let Some(variant) = spec.kind.psi() {
        let lambda = lambda_vector(variant, alpha, c)?;
        let col = lambda.view().insert_axis(Axis(1));
        return Ok(col.dot(&col.t()));
    }
    let lap = match &spec.kind {
        RegularizerKind::GammaKnn { k } => knn_laplacian(data, *k)?,
        RegularizerKind::GammaWithin { n_clusters } => {
            let clusters = kmeans(data, *n_clusters, seed, KMEANS_MAX_ITERS)?;
            within_cluster_laplacian(&clusters, n)?
        }
        RegularizerKind::GammaBetween { n_clusters } => {
            let clusters = kmeans(data, *n_clusters, seed, KMEANS_MAX_ITERS)?;
            between_cluster_laplacian(&clusters, n)?
        }
        RegularizerKind::Graph(lap) => {
            if lap.size() != n {
                return Err(OccError::DimensionMismatch {
                    expected: n,
                    found: lap.size(),
                });
            }
            lap.clone()
        }
        _ => unreachable!("psi kinds handled above"),
    };
    Ok(lap.matrix)
}

/// `Xᵀ diag(α) X − (Xᵀα)(Xᵀα)ᵀ` for row-sample `X`.
fn description_scatter(data: ArrayView2<'_, f64>, alpha: ArrayView1<'_, f64>) -> Array2<f64> {
    let support: Vec<usize> = (0..alpha.len()).filter(|&i| alpha[i] != 0.0).collect();
    let xs = data.select(Axis(0), &support);
    let w = Array1::from_iter(support.iter().map(|&i| alpha[i]));
    let weighted = &xs * &w.view().insert_axis(Axis(1));
    let center = xs.t().dot(&w);
    let center_col = center.view().insert_axis(Axis(1));
    xs.t().dot(&weighted) - center_col.dot(&center_col.t())
}

/// `Xᵀ Λ X` for row-sample `X`.
fn regularizer_scatter(data: ArrayView2<'_, f64>, lambda: &Array2<f64>) -> Array2<f64> {
    data.t().dot(&lambda.dot(&data))
}

fn gradient_from_scatter(
    q: ArrayView2<'_, f64>,
    description: &Array2<f64>,
    reg: &Array2<f64>,
    beta: f64,
) -> Array2<f64> {
    let total = description + &(reg * beta);
    q.dot(&total) * 2.0
}

fn check_gradient_inputs(
    q: ArrayView2<'_, f64>,
    data: ArrayView2<'_, f64>,
    alpha: ArrayView1<'_, f64>,
    lambda: &Array2<f64>,
) -> Result<()> {
    let (n, dim) = data.dim();
    let mismatch = |expected, found| Err(OccError::DimensionMismatch { expected, found });
    if q.ncols() != dim {
        return mismatch(dim, q.ncols());
    }
    if alpha.len() != n {
        return mismatch(n, alpha.len());
    }
    if lambda.dim() != (n, n) {
        return mismatch(n, lambda.nrows());
    }
    Ok(())
}

/// Gradient of the augmented Lagrangian with respect to `Q`:
/// `2Q[Xᵀdiag(α)X − (Xᵀα)(Xᵀα)ᵀ + β XᵀΛX]` (rows of `data` are samples).
pub fn lagrangian_gradient(
    q: ArrayView2<'_, f64>,
    data: ArrayView2<'_, f64>,
    alpha: ArrayView1<'_, f64>,
    lambda: &Array2<f64>,
    beta: f64,
) -> Result<Array2<f64>> {
    check_gradient_inputs(q, data, alpha, lambda)?;
    let description = description_scatter(data, alpha);
    let reg = regularizer_scatter(data, lambda);
    Ok(gradient_from_scatter(q, &description, &reg, beta))
}

/// Value of the augmented Lagrangian.
pub fn lagrangian_value(
    q: ArrayView2<'_, f64>,
    data: ArrayView2<'_, f64>,
    alpha: ArrayView1<'_, f64>,
    lambda: &Array2<f64>,
    beta: f64,
) -> Result<f64> {
    check_gradient_inputs(q, data, alpha, lambda)?;
    let z = data.dot(&q.t());
    let norms = z.map_axis(Axis(1), |r| r.dot(&r));
    let center = z.t().dot(&alpha);
    let reg = z.t().dot(&lambda.dot(&z)).diag().sum();
    Ok(alpha.dot(&norms) - center.dot(&center) + beta * reg)
}

/// Alternating optimization on target-class rows `data` (N×D).
pub fn fit_ssvdd(data: ArrayView2<'_, f64>, config: &SsvddConfig) -> Result<SsvddModel> {
    let (n, dim) = data.dim();
    if n == 0 {
        return Err(OccError::EmptyDataset);
    }
    check_d(config.d, dim)?;
    if !(config.eta >= 0.0 && config.eta.is_finite()) {
        return Err(invalid(
            "eta",
            format!("{} is not a non-negative number", config.eta),
        ));
    }
    if !(config.regularizer.beta >= 0.0 && config.regularizer.beta.is_finite()) {
        return Err(invalid(
            "beta",
            format!("{} is not a non-negative number", config.regularizer.beta),
        ));
    }
    crate::check_finite_view(data)?;

    let spec = &config.regularizer;
    let fixed_reg = if spec.kind.depends_on_alpha() {
        None
    } else {
        let lambda =
            regularizer_matrix(spec, data, Array1::zeros(n).view(), config.c, config.seed)?;
        Some(regularizer_scatter(data, &lambda))
    };

    let mut q = initial_projection(data, config)?;
    let mut history = Vec::with_capacity(config.n_iters);
    for it in 0..config.n_iters {
        let z = data.dot(&q.t());
        let svdd = solve_svdd_with(z.view(), config.c, &config.smo)?;
        history.push(IterationRecord {
            objective: svdd.objective,
            radius_sq: svdd.radius_sq,
        });
        let reg = match &fixed_reg {
            Some(m) => m.clone(),
            None => {
                let lambda =
                    regularizer_matrix(spec, data, svdd.alpha.view(), config.c, config.seed)?;
                regularizer_scatter(data, &lambda)
            }
        };
        let description = description_scatter(data, svdd.alpha.view());
        let grad = gradient_from_scatter(q.view(), &description, &reg, spec.beta);
        let stepped = &q - &(grad * config.eta);
        if stepped.iter().any(|v| !v.is_finite()) {
            return Err(OccError::NonFiniteProjection(it));
        }
        q = orthonormalize_rows(stepped.view());
        if q.iter().any(|v| !v.is_finite()) {
            return Err(OccError::NonFiniteProjection(it));
        }
    }
    let z = data.dot(&q.t());
    let inner = solve_svdd_with(z.view(), config.c, &config.smo)?;

    Ok(SsvddModel {
        q,
        inner,
        regularizer: spec.clone(),
        eta: config.eta,
        d: config.d,
        n_iters: config.n_iters,
        history,
    })
}

impl SsvddModel {
    pub fn input_dim(&self) -> usize {
        self.q.ncols()
    }

    pub fn project(&self, sample: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        if sample.len() != self.input_dim() {
            return Err(OccError::DimensionMismatch {
                expected: self.input_dim(),
                found: sample.len(),
            });
        }
        Ok(self.q.dot(&sample))
    }

    pub fn classify(&self, sample: ArrayView1<'_, f64>) -> Result<Decision> {
        let z = self.project(sample)?;
        self.inner.classify(z.view())
    }
}

pub fn classify_ssvdd(model: &SsvddModel, sample: ArrayView1<'_, f64>) -> Result<Decision> {
    model.classify(sample)
}
