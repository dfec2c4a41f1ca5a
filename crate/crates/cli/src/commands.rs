use std::fmt::Write as _;

use anyhow::{bail, Context, Result};
use occ_core::dataset::{
    apply_normalizer, fit_normalizer, load_csv, make_split_plan, NormalizationStats,
};
use occ_core::eval::{
    compute_metrics, cross_validate, markdown_table, metrics_csv, run_experiment, run_sweep,
    sweep_csv, ExperimentResult, HyperParams, MetricsReport, TrainedModel, METRIC_NAMES,
};
use occ_core::{Dataset, Label};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::output::write_atomic;
use crate::EvaluateArgs;

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Everything needed to score raw samples later.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub format_version: u32,
    pub feature_names: Vec<String>,
    pub normalizer: NormalizationStats,
    pub model: TrainedModel,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainLog {
    pub model: String,
    pub params: HyperParams,
    pub cv_gm: Option<f64>,
    pub n_train: usize,
    pub n_targets: usize,
    pub iterations: usize,
    pub radius_sq: Option<f64>,
}

fn load(cfg: &RunConfig) -> Result<Dataset> {
    let path = cfg.data_path()?;
    load_csv(path, &cfg.label, &cfg.positive).with_context(|| format!("loading {}", path.display()))
}

pub fn train(cfg: &RunConfig) -> Result<()> {
    let spec = cfg.single_spec()?;
    let dataset = load(cfg)?;
    let train_raw = match cfg.train_split {
        Some(r) => {
            let plan = make_split_plan(&dataset, cfg.split_seed, r + 1, cfg.fraction)?;
            dataset.subset(&plan.splits[r].train)
        }
        None => dataset.clone(),
    };
    let normalizer = fit_normalizer(&train_raw)?;
    let train = apply_normalizer(&normalizer, &train_raw)?;

    let points = cfg.protocol.grid.points(&spec, train.n_features())?;
    let (params, cv_gm) = if points.len() == 1 {
        (points[0], None)
    } else {
        if train.is_single_class() {
            bail!(
                "cross-validation over {} grid points needs outlier rows in the training data; \
                 fix the hyperparameters with --set grid.<name>=<value>",
                points.len()
            );
        }
        let cv = cross_validate(
            &train,
            &spec,
            &cfg.protocol.grid,
            cfg.protocol.folds,
            cfg.protocol.cv_seed,
            &cfg.protocol.fit,
        )
        .context("cross-validation failed")?;
        (cv.best, Some(cv.best_gm))
    };

    let targets = train.target_features();
    let model = TrainedModel::fit(spec, params, targets.view(), &cfg.protocol.fit)
        .with_context(|| format!("training {spec} with {params}"))?;
    let log = TrainLog {
        model: spec.label(),
        params,
        cv_gm,
        n_train: train.len(),
        n_targets: targets.nrows(),
        iterations: model.model.iterations(),
        radius_sq: model.model.radius_sq(),
    };
    let artifact = ModelArtifact {
        format_version: MODEL_FORMAT_VERSION,
        feature_names: dataset.feature_names().to_vec(),
        normalizer,
        model,
    };
    let model_path = cfg.out.join("model.json");
    write_atomic(&model_path, &serde_json::to_vec(&artifact)?)?;
    write_atomic(
        &cfg.out.join("train_log.json"),
        &serde_json::to_vec_pretty(&log)?,
    )?;
    println!(
        "trained {} [{}] -> {}",
        log.model,
        params,
        model_path.display()
    );
    Ok(())
}

fn print_metrics(name: &str, m: &MetricsReport) {
    let cells: Vec<String> = METRIC_NAMES
        .iter()
        .zip(m.values())
        .map(|(n, v)| format!("{n}={v:.4}"))
        .collect();
    println!("{name}: {}", cells.join(" "));
}

pub fn evaluate(args: &EvaluateArgs) -> Result<()> {
    let text = std::fs::read(&args.model_file)
        .with_context(|| format!("reading model file {}", args.model_file.display()))?;
    let artifact: ModelArtifact = serde_json::from_slice(&text)
        .with_context(|| format!("model file {} is not readable", args.model_file.display()))?;
    if artifact.format_version != MODEL_FORMAT_VERSION {
        bail!(
            "unsupported model format version {}",
            artifact.format_version
        );
    }
    if !args.data.exists() {
        bail!("dataset not found: {}", args.data.display());
    }
    let data = load_csv(&args.data, &args.label, &args.positive)
        .with_context(|| format!("loading {}", args.data.display()))?;
    if data.n_features() != artifact.feature_names.len() {
        bail!(
            "feature mismatch: model expects {} features, {} has {}",
            artifact.feature_names.len(),
            args.data.display(),
            data.n_features()
        );
    }
    if data.is_single_class() {
        log::warn!(
            "{} holds a single class; some rates are undefined and reported as 0",
            args.data.display()
        );
    }
    let normalized = artifact.normalizer.transform(data.features())?;
    let decisions = artifact.model.decide(normalized.view())?;
    let pred: Vec<Label> = decisions.iter().map(|d| d.label).collect();
    let metrics = compute_metrics(&pred, data.labels())?;

    let mut scores = String::from("index,score,prediction,label\n");
    for (i, (d, t)) in decisions.iter().zip(data.labels()).enumerate() {
        let _ = writeln!(scores, "{i},{:.9},{},{}", d.score, d.label, t);
    }
    write_atomic(&args.out.join("scores.csv"), scores.as_bytes())?;

    let mut csv = String::from(occ_core::eval::report::METRICS_CSV_HEADER);
    let _ = write!(csv, "\n{},all", artifact.model.spec.label());
    for v in metrics.values() {
        let _ = write!(csv, ",{v:.6}");
    }
    csv.push('\n');
    write_atomic(&args.out.join("metrics.csv"), csv.as_bytes())?;
    print_metrics(&artifact.model.spec.label(), &metrics);
    Ok(())
}

fn params_csv(results: &[ExperimentResult]) -> String {
    let mut out = String::from("model,split,cv_gm,params\n");
    for r in results {
        for s in &r.splits {
            let _ = writeln!(
                out,
                "{},{},{:.6},{}",
                r.spec.label(),
                s.repeat,
                s.cv_gm,
                s.params
            );
        }
    }
    out
}

pub fn experiment(cfg: &RunConfig) -> Result<()> {
    let dataset = load(cfg)?;
    let plan = make_split_plan(&dataset, cfg.split_seed, cfg.repeats, cfg.fraction)?;
    let mut results = Vec::new();
    let mut failures = Vec::new();
    for spec in cfg.specs() {
        match run_experiment(&dataset, &spec, &plan, &cfg.protocol) {
            Ok(r) => {
                println!("{:<28} gm {:.2} ± {:.2}", spec.label(), r.mean.gm, r.std.gm);
                results.push(r);
            }
            Err(e) => {
                eprintln!("{:<28} FAILED: {e}", spec.label());
                failures.push((spec.label(), e.to_string()));
            }
        }
    }
    write_atomic(
        &cfg.out.join("metrics.csv"),
        metrics_csv(&results).as_bytes(),
    )?;
    write_atomic(
        &cfg.out.join("table.md"),
        markdown_table(&results).as_bytes(),
    )?;
    write_atomic(&cfg.out.join("params.csv"), params_csv(&results).as_bytes())?;
    println!(
        "{} of {} models completed; results in {}",
        results.len(),
        results.len() + failures.len(),
        cfg.out.display()
    );
    if !failures.is_empty() {
        for (m, e) in &failures {
            eprintln!("failed: {m}: {e}");
        }
        bail!("{} model(s) failed", failures.len());
    }
    Ok(())
}

pub fn sweep(cfg: &RunConfig) -> Result<()> {
    let spec = cfg.single_spec()?;
    let param = cfg
        .sweep_param
        .context("no sweep parameter (use --param or sweep.param)")?;
    if cfg.sweep_values.is_empty() {
        bail!("no sweep values (use --values or sweep.values)");
    }
    let dataset = load(cfg)?;
    let plan = make_split_plan(&dataset, cfg.split_seed, cfg.repeats, cfg.fraction)?;
    let result = run_sweep(
        &dataset,
        &spec,
        &plan,
        &cfg.protocol,
        param,
        &cfg.sweep_values,
    )?;
    let name = format!(
        "sweep_{}_{}.csv",
        spec.label().replace('+', "_"),
        param.name()
    );
    let path = cfg.out.join(name);
    write_atomic(&path, sweep_csv(&result).as_bytes())?;
    println!(
        "{} values of {} for {} -> {}",
        result.rows.len(),
        param,
        spec,
        path.display()
    );
    Ok(())
}
