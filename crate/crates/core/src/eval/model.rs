//! Fitting and scoring any model recipe through one interface.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use super::grid::{HyperParams, ModelKind, ModelSpec, Param, SsvddVariant};
use crate::baselines::{solve_ocsvm_with, OcsvmModel};
use crate::error::{OccError, Result};
use crate::kernel_npt::{fit_npt, median_pairwise_distance, NptMap};
use crate::smo::SmoOptions;
use crate::ssvdd::{
    fit_ssvdd, ProjectionInit, RegularizerKind, RegularizerSpec, SsvddConfig, SsvddModel,
};
use crate::svdd::{solve_svdd_with, SvddModel};
use crate::{Decision, Label};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub n_iters: usize,
    pub smo: SmoOptions,
    pub init: ProjectionInit,
    /// Seeds k-means and random projection starts.
    pub seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            n_iters: 20,
            smo: SmoOptions::default(),
            init: ProjectionInit::Pca,
            seed: 0,
        }
    }
}

/// The description fitted in the model's working representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinearModel {
    Svdd(SvddModel),
    Ocsvm(OcsvmModel),
    Ssvdd(SsvddModel),
}

impl LinearModel {
    pub fn classify(&self, sample: ndarray::ArrayView1<'_, f64>) -> Result<Decision> {
        match self {
            LinearModel::Svdd(m) => m.classify(sample),
            LinearModel::Ocsvm(m) => m.classify(sample),
            LinearModel::Ssvdd(m) => m.classify(sample),
        }
    }

    /// Squared radius of the final description, if the model has one.
    pub fn radius_sq(&self) -> Option<f64> {
        match self {
            LinearModel::Svdd(m) => Some(m.radius_sq),
            LinearModel::Ssvdd(m) => Some(m.inner.radius_sq),
            LinearModel::Ocsvm(_) => None,
        }
    }

    pub fn iterations(&self) -> usize {
        match self {
            LinearModel::Svdd(m) => m.iterations,
            LinearModel::Ocsvm(m) => m.iterations,
            LinearModel::Ssvdd(m) => m.n_iters,
        }
    }
}

fn regularizer_for(variant: SsvddVariant, params: &HyperParams) -> Result<RegularizerSpec> {
    let kind = match variant {
        SsvddVariant::Psi1 => return Ok(RegularizerSpec::none()),
        SsvddVariant::Psi2 => RegularizerKind::Psi2,
        SsvddVariant::Psi3 => RegularizerKind::Psi3,
        SsvddVariant::Psi4 => RegularizerKind::Psi4,
        SsvddVariant::GammaKnn => RegularizerKind::GammaKnn {
            k: params.require(Param::K)? as usize,
        },
        SsvddVariant::GammaWithin => RegularizerKind::GammaWithin {
            n_clusters: params.require(Param::Clusters)? as usize,
        },
        SsvddVariant::GammaBetween => RegularizerKind::GammaBetween {
            n_clusters: params.require(Param::Clusters)? as usize,
        },
    };
    Ok(RegularizerSpec::new(kind, params.require(Param::Beta)?))
}

/// Fits the linear part of a recipe on rows already in the working
/// representation (input space, or the kernel map for kernelized models).
pub fn fit_linear(
    kind: ModelKind,
    params: &HyperParams,
    data: ArrayView2<'_, f64>,
    opts: &FitOptions,
) -> Result<LinearModel> {
    match kind {
        ModelKind::Svdd => Ok(LinearModel::Svdd(solve_svdd_with(
            data,
            params.require(Param::C)?,
            &opts.smo,
        )?)),
        ModelKind::Ocsvm => Ok(LinearModel::Ocsvm(solve_ocsvm_with(
            data,
            params.require(Param::Nu)?,
            &opts.smo,
        )?)),
        ModelKind::Ssvdd(variant) => {
            let mut config = SsvddConfig::new(
                params.require(Param::C)?,
                regularizer_for(variant, params)?,
                params.require(Param::D)? as usize,
                params.require(Param::Eta)?,
            );
            config.n_iters = opts.n_iters;
            config.seed = opts.seed;
            config.init = opts.init;
            config.smo = opts.smo;
            Ok(LinearModel::Ssvdd(fit_ssvdd(data, &config)?))
        }
    }
}

/// Kernel map for `targets` with width `scale × median pairwise distance`.
pub fn fit_kernel_map(targets: ArrayView2<'_, f64>, scale: f64) -> Result<NptMap> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(crate::error::invalid(
            "sigma",
            format!("{scale} is not a positive multiplier"),
        ));
    }
    fit_npt(targets, scale * median_pairwise_distance(targets))
}

/// A fitted recipe: optional kernel map followed by a linear description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub spec: ModelSpec,
    pub params: HyperParams,
    pub npt: Option<NptMap>,
    pub model: LinearModel,
}

impl TrainedModel {
    /// Fits on target rows only.
    pub fn fit(
        spec: ModelSpec,
        params: HyperParams,
        targets: ArrayView2<'_, f64>,
        opts: &FitOptions,
    ) -> Result<Self> {
        if targets.nrows() == 0 {
            return Err(OccError::NoTargetSamples);
        }
        let npt = if spec.is_kernelized() {
            Some(fit_kernel_map(targets, params.require(Param::Sigma)?)?)
        } else {
            None
        };
        let model = match &npt {
            Some(map) => fit_linear(spec.kind, &params, map.training_embedding().view(), opts)?,
            None => fit_linear(spec.kind, &params, targets, opts)?,
        };
        Ok(Self {
            spec,
            params,
            npt,
            model,
        })
    }

    pub fn input_dim(&self) -> usize {
        match (&self.npt, &self.model) {
            (Some(map), _) => map.input_dim(),
            (None, LinearModel::Svdd(m)) => m.dim(),
            (None, LinearModel::Ocsvm(m)) => m.dim(),
            (None, LinearModel::Ssvdd(m)) => m.input_dim(),
        }
    }

    fn represent(&self, samples: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if samples.ncols() != self.input_dim() {
            return Err(OccError::DimensionMismatch {
                expected: self.input_dim(),
                found: samples.ncols(),
            });
        }
        match &self.npt {
            Some(map) => map.map(samples),
            None => Ok(samples.to_owned()),
        }
    }

    pub fn decide(&self, samples: ArrayView2<'_, f64>) -> Result<Vec<Decision>> {
        let rep = self.represent(samples)?;
        rep.outer_iter()
            .map(|row| self.model.classify(row))
            .collect()
    }

    pub fn predict(&self, samples: ArrayView2<'_, f64>) -> Result<Vec<Label>> {
        Ok(self.decide(samples)?.into_iter().map(|d| d.label).collect())
    }
}

pub(crate) fn predict_linear(model: &LinearModel, rep: ArrayView2<'_, f64>) -> Result<Vec<Label>> {
    rep.outer_iter()
        .map(|row| model.classify(row).map(|d| d.label))
        .collect()
}
