//! Cross-validated model selection and the repeated train/test protocol.

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{GridSpec, HyperParams, ModelSpec, Param};
use super::metrics::{aggregate, compute_metrics, MetricsReport, MetricsSummary};
use super::model::{fit_kernel_map, fit_linear, predict_linear, FitOptions, TrainedModel};
use crate::dataset::{
    apply_normalizer, fit_normalizer, kfold_indices, NormalizationStats, SplitPlan,
};
use crate::error::{OccError, Result};
use crate::{Dataset, Label};

/// Mean GM values closer than this are treated as a tie.
pub const GM_TIE_TOLERANCE: f64 = 1e-12;

/// One row of the cross-validation table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvEntry {
    pub params: HyperParams,
    /// GM per fold; empty when the point failed.
    pub fold_gm: Vec<f64>,
    pub mean_gm: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvOutcome {
    pub best: HyperParams,
    pub best_gm: f64,
    pub table: Vec<CvEntry>,
}

/// Fold data in the working representation of one kernel width.
struct FoldView {
    fit: Array2<f64>,
    validate: Array2<f64>,
    truth: Vec<Label>,
}

fn fold_view(
    train: &Dataset,
    fit: &[usize],
    validate: &[usize],
    sigma: Option<f64>,
) -> Result<FoldView> {
    let fit_targets: Vec<usize> = fit
        .iter()
        .copied()
        .filter(|&i| train.labels()[i].is_target())
        .collect();
    let fit_rows = train.subset(&fit_targets);
    let val = train.subset(validate);
    let truth = val.labels().to_vec();
    match sigma {
        None => Ok(FoldView {
            fit: fit_rows.features().clone(),
            validate: val.features().clone(),
            truth,
        }),
        Some(scale) => {
            let map = fit_kernel_map(fit_rows.features().view(), scale)?;
            Ok(FoldView {
                fit: map.training_embedding(),
                validate: map.map(val.features().view())?,
                truth,
            })
        }
    }
}

fn point_gm(
    spec: &ModelSpec,
    params: &HyperParams,
    view: &FoldView,
    opts: &FitOptions,
) -> Result<f64> {
    let model = fit_linear(spec.kind, params, view.fit.view(), opts)?;
    let pred = predict_linear(&model, view.validate.view())?;
    Ok(compute_metrics(&pred, &view.truth)?.gm)
}

/// True when `a` should be preferred over `b` with equal mean GM.
fn simpler(a: &HyperParams, b: &HyperParams) -> bool {
    let d = |p: &HyperParams| p.d.unwrap_or(0);
    let c = |p: &HyperParams| p.c.unwrap_or(0.0);
    (d(a), c(a)) < (d(b), c(b))
}

/// Index of the selected row: maximal mean GM, then smaller d, then
/// smaller C, then earliest grid position.
pub fn select_best(table: &[CvEntry]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, e) in table.iter().enumerate() {
        let Some(gm) = e.mean_gm else { continue };
        best = match best {
            None => Some((i, gm)),
            Some((j, bgm)) => {
                if gm > bgm + GM_TIE_TOLERANCE
                    || ((gm - bgm).abs() <= GM_TIE_TOLERANCE
                        && simpler(&e.params, &table[j].params))
                {
                    Some((i, gm))
                } else {
                    Some((j, bgm))
                }
            }
        };
    }
    best.map(|(i, _)| i)
}

/// k-fold grid search on `train`: each grid point is fit on the target rows
/// of every fold complement and scored by GM on the held-out fold (both
/// classes). Fold GMs are averaged per point. Points that fail on any fold
/// are excluded from selection.
pub fn cross_validate(
    train: &Dataset,
    spec: &ModelSpec,
    grid: &GridSpec,
    k: usize,
    seed: u64,
    opts: &FitOptions,
) -> Result<CvOutcome> {
    let points = grid.points(spec, train.n_features())?;
    let folds = kfold_indices(train, k, seed)?;

    let sigmas: Vec<Option<f64>> = if spec.is_kernelized() {
        let mut s: Vec<f64> = Vec::new();
        for p in &points {
            let v = p.require(Param::Sigma)?;
            if !s.contains(&v) {
                s.push(v);
            }
        }
        s.into_iter().map(Some).collect()
    } else {
        vec![None]
    };

    // views[fold][sigma]
    let views: Vec<Vec<std::result::Result<FoldView, String>>> = folds
        .par_iter()
        .map(|f| {
            sigmas
                .iter()
                .map(|&s| fold_view(train, &f.fit, &f.validate, s).map_err(|e| e.to_string()))
                .collect()
        })
        .collect();

    let table: Vec<CvEntry> = points
        .par_iter()
        .map(|params| {
            let si = sigmas.iter().position(|&s| s == params.sigma).unwrap_or(0);
            let mut fold_gm = Vec::with_capacity(folds.len());
            for per_sigma in &views {
                let gm = match &per_sigma[si] {
                    Ok(view) => point_gm(spec, params, view, opts).map_err(|e| e.to_string()),
                    Err(e) => Err(e.clone()),
                };
                match gm {
                    Ok(g) => fold_gm.push(g),
                    Err(e) => {
                        log::debug!("{spec} [{params}] failed: {e}");
                        return CvEntry {
                            params: *params,
                            fold_gm: Vec::new(),
                            mean_gm: None,
                            error: Some(e),
                        };
                    }
                }
            }
            let mean = fold_gm.iter().sum::<f64>() / fold_gm.len() as f64;
            CvEntry {
                params: *params,
                fold_gm,
                mean_gm: Some(mean),
                error: None,
            }
        })
        .collect();

    let best = select_best(&table).ok_or(OccError::AllGridPointsFailed)?;
    Ok(CvOutcome {
        best: table[best].params,
        best_gm: table[best].mean_gm.unwrap_or(0.0),
        table,
    })
}

/// Protocol settings shared by experiments and sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub grid: GridSpec,
    pub folds: usize,
    /// Seeds fold assignment; repeat `r` uses `cv_seed + r`.
    pub cv_seed: u64,
    pub fit: FitOptions,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            grid: GridSpec::default(),
            folds: 5,
            cv_seed: 0,
            fit: FitOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitResult {
    pub repeat: usize,
    pub params: HyperParams,
    pub cv_gm: f64,
    pub metrics: MetricsReport,
    pub normalizer: NormalizationStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub spec: ModelSpec,
    pub splits: Vec<SplitResult>,
    pub mean: MetricsSummary,
    pub std: MetricsSummary,
}

impl ExperimentResult {
    pub fn reports(&self) -> Vec<MetricsReport> {
        self.splits.iter().map(|s| s.metrics).collect()
    }
}

/// Train and test sets of one repeat, normalized with statistics from the
/// training targets.
pub struct PreparedSplit {
    pub train: Dataset,
    pub test: Dataset,
    pub normalizer: NormalizationStats,
}

pub fn prepare_split(
    dataset: &Dataset,
    train_idx: &[usize],
    test_idx: &[usize],
) -> Result<PreparedSplit> {
    let train_raw = dataset.subset(train_idx);
    let test_raw = dataset.subset(test_idx);
    let normalizer = fit_normalizer(&train_raw)?;
    Ok(PreparedSplit {
        train: apply_normalizer(&normalizer, &train_raw)?,
        test: apply_normalizer(&normalizer, &test_raw)?,
        normalizer,
    })
}

fn run_repeat(
    dataset: &Dataset,
    spec: &ModelSpec,
    plan: &SplitPlan,
    r: usize,
    cfg: &ProtocolConfig,
) -> Result<SplitResult> {
    let split = &plan.splits[r];
    let prepared = prepare_split(dataset, &split.train, &split.test)?;
    let cv = cross_validate(
        &prepared.train,
        spec,
        &cfg.grid,
        cfg.folds,
        cfg.cv_seed.wrapping_add(r as u64),
        &cfg.fit,
    )?;
    let model = TrainedModel::fit(
        *spec,
        cv.best,
        prepared.train.target_features().view(),
        &cfg.fit,
    )?;
    let pred = model.predict(prepared.test.features().view())?;
    let metrics = compute_metrics(&pred, prepared.test.labels())?;
    log::info!("{spec} split {r}: gm={:.4} [{}]", metrics.gm, cv.best);
    Ok(SplitResult {
        repeat: r,
        params: cv.best,
        cv_gm: cv.best_gm,
        metrics,
        normalizer: prepared.normalizer,
    })
}

/// Per repeat: normalize with training-target statistics, select
/// hyperparameters by cross-validation on the training split, refit on all
/// training targets and evaluate on the test split.
pub fn run_experiment(
    dataset: &Dataset,
    spec: &ModelSpec,
    plan: &SplitPlan,
    cfg: &ProtocolConfig,
) -> Result<ExperimentResult> {
    if plan.splits.is_empty() {
        return Err(crate::error::invalid("plan", "no splits"));
    }
    let splits = (0..plan.splits.len())
        .into_par_iter()
        .map(|r| run_repeat(dataset, spec, plan, r, cfg))
        .collect::<Result<Vec<_>>>()?;
    let reports: Vec<MetricsReport> = splits.iter().map(|s| s.metrics).collect();
    let (mean, std) = aggregate(&reports);
    Ok(ExperimentResult {
        spec: *spec,
        splits,
        mean,
        std,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub mean: MetricsSummary,
    pub std: MetricsSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub spec: ModelSpec,
    pub param: Param,
    pub rows: Vec<SweepRow>,
}

/// Sensitivity of test metrics to one hyperparameter. The remaining
/// hyperparameters are chosen once per repeat by cross-validation with the
/// swept parameter fixed at `values[0]`, then held fixed for every value.
pub fn run_sweep(
    dataset: &Dataset,
    spec: &ModelSpec,
    plan: &SplitPlan,
    cfg: &ProtocolConfig,
    param: Param,
    values: &[f64],
) -> Result<SweepResult> {
    if !spec.uses(param) {
        return Err(OccError::InapplicableParameter {
            param: param.name().to_string(),
            model: spec.label(),
        });
    }
    if values.is_empty() {
        return Err(OccError::EmptyGrid);
    }
    let mut grid = cfg.grid.clone();
    grid.set_values(param, vec![values[0]]);
    // rejects out-of-domain sweep values before any fitting
    let mut check = cfg.grid.clone();
    check.set_values(param, values.to_vec());
    check.points(spec, dataset.n_features())?;

    // per_repeat[r][v]
    let per_repeat = (0..plan.splits.len())
        .into_par_iter()
        .map(|r| {
            let split = &plan.splits[r];
            let prepared = prepare_split(dataset, &split.train, &split.test)?;
            let cv = cross_validate(
                &prepared.train,
                spec,
                &grid,
                cfg.folds,
                cfg.cv_seed.wrapping_add(r as u64),
                &cfg.fit,
            )?;
            let targets = prepared.train.target_features();
            values
                .iter()
                .map(|&v| {
                    let mut params = cv.best;
                    params.set(param, v);
                    let model = TrainedModel::fit(*spec, params, targets.view(), &cfg.fit)?;
                    let pred = model.predict(prepared.test.features().view())?;
                    compute_metrics(&pred, prepared.test.labels())
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let rows = values
        .iter()
        .enumerate()
        .map(|(vi, &value)| {
            let reports: Vec<MetricsReport> = per_repeat.iter().map(|r| r[vi]).collect();
            let (mean, std) = aggregate(&reports);
            SweepRow { value, mean, std }
        })
        .collect();
    Ok(SweepResult {
        spec: *spec,
        param,
        rows,
    })
}
