use occ_core::dataset::synthetic::blobs_with_ring;
use occ_core::dataset::{fit_normalizer, kfold_indices, make_split_plan};
use occ_core::eval::{
    cross_validate, metrics_csv, run_experiment, FitOptions, GridSpec, KernelChoice, ModelKind,
    ModelSpec, ProtocolConfig,
};
use occ_core::kernel_npt::{fit_npt, median_pairwise_distance};
use occ_core::svdd::solve_svdd;
use occ_core::{Dataset, Label};

fn sigma_grid() -> GridSpec {
    let mut g = GridSpec::compact();
    g.c = vec![0.1];
    g.sigma = vec![0.1, 0.5, 1.0, 3.0];
    g
}

/// GM from scratch: fit kernel SVDD on fold targets, count on the held-out rows.
fn oracle_fold_gm(data: &Dataset, fit: &[usize], validate: &[usize], c: f64, scale: f64) -> f64 {
    let targets: Vec<usize> = fit
        .iter()
        .copied()
        .filter(|&i| data.labels()[i] == Label::Target)
        .collect();
    let xf = data.subset(&targets);
    let sigma = scale * median_pairwise_distance(xf.features().view());
    let map = fit_npt(xf.features().view(), sigma).unwrap();
    let model = solve_svdd(map.training_embedding().view(), c).unwrap();
    let xv = data.subset(validate);
    let z = map.map(xv.features().view()).unwrap();
    let (mut tp, mut fneg, mut tn, mut fp) = (0.0, 0.0, 0.0, 0.0);
    for (row, truth) in z.outer_iter().zip(xv.labels()) {
        let inside = model.classify(row).unwrap().score >= 0.0;
        match (truth, inside) {
            (Label::Target, true) => tp += 1.0,
            (Label::Target, false) => fneg += 1.0,
            (Label::Outlier, false) => tn += 1.0,
            (Label::Outlier, true) => fp += 1.0,
        }
    }
    let tpr: f64 = if tp + fneg > 0.0 {
        tp / (tp + fneg)
    } else {
        0.0
    };
    let tnr: f64 = if tn + fp > 0.0 { tn / (tn + fp) } else { 0.0 };
    (tpr * tnr).sqrt()
}

#[test]
fn cv_choice_matches_independent_rerun() {
    let data = blobs_with_ring(60, 60, 5);
    let spec = ModelSpec::new(ModelKind::Svdd, KernelChoice::Rbf);
    let cv = cross_validate(&data, &spec, &sigma_grid(), 4, 11, &FitOptions::default()).unwrap();
    let folds = kfold_indices(&data, 4, 11).unwrap();
    let mut best = (f64::NEG_INFINITY, 0.0);
    for (entry, &scale) in cv.table.iter().zip(&sigma_grid().sigma) {
        let gms: Vec<f64> = folds
            .iter()
            .map(|f| oracle_fold_gm(&data, &f.fit, &f.validate, 0.1, scale))
            .collect();
        let mean = gms.iter().sum::<f64>() / gms.len() as f64;
        assert!(
            (entry.mean_gm.unwrap() - mean).abs() < 1e-12,
            "sigma {scale}"
        );
        if mean > best.0 + 1e-12 {
            best = (mean, scale);
        }
    }
    assert_eq!(cv.best.sigma, Some(best.1));
    assert!((cv.best_gm - best.0).abs() < 1e-12);
}

fn small_config() -> ProtocolConfig {
    let mut grid = GridSpec::compact();
    grid.c = vec![0.05, 0.2];
    grid.sigma = vec![0.5, 1.0];
    ProtocolConfig {
        grid,
        folds: 3,
        cv_seed: 3,
        fit: FitOptions::default(),
    }
}

#[test]
fn test_rows_do_not_leak_into_training() {
    let data = blobs_with_ring(50, 50, 8);
    let plan = make_split_plan(&data, 17, 2, 0.7).unwrap();
    let spec = ModelSpec::new(ModelKind::Svdd, KernelChoice::Rbf);
    let cfg = small_config();
    let base = run_experiment(&data, &spec, &plan, &cfg).unwrap();

    // corrupt every row that is a test row of split 0
    let mut features = data.features().clone();
    for &i in &plan.splits[0].test {
        features.row_mut(i).mapv_inplace(|v| v * 50.0 + 7.0);
    }
    let corrupted = data.with_features(features).unwrap();
    let other = run_experiment(&corrupted, &spec, &plan, &cfg).unwrap();
    assert_eq!(base.splits[0].normalizer, other.splits[0].normalizer);
    assert_eq!(base.splits[0].params, other.splits[0].params);
    assert_eq!(base.splits[0].cv_gm, other.splits[0].cv_gm);

    // statistics recomputed from the training split alone
    for (s, split) in base.splits.iter().zip(&plan.splits) {
        let train = data.subset(&split.train);
        assert_eq!(s.normalizer, fit_normalizer(&train).unwrap());
        let normalized = occ_core::dataset::apply_normalizer(&s.normalizer, &train).unwrap();
        let cv = cross_validate(
            &normalized,
            &spec,
            &cfg.grid,
            cfg.folds,
            cfg.cv_seed + s.repeat as u64,
            &cfg.fit,
        )
        .unwrap();
        assert_eq!(cv.best, s.params);
    }
}

#[test]
fn experiment_is_deterministic_and_aggregates_consistently() {
    let data = blobs_with_ring(40, 40, 9);
    let plan = make_split_plan(&data, 5, 3, 0.7).unwrap();
    let spec = ModelSpec::new(ModelKind::Ocsvm, KernelChoice::Rbf);
    let cfg = small_config();
    let a = run_experiment(&data, &spec, &plan, &cfg).unwrap();
    let replan = make_split_plan(&data, 5, 3, 0.7).unwrap();
    let b = run_experiment(&data, &spec, &replan, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(metrics_csv(std::slice::from_ref(&a)), metrics_csv(&[b]));
    assert_eq!(a.splits.len(), plan.n_repeats);

    let gms: Vec<f64> = a.splits.iter().map(|s| s.metrics.gm).collect();
    let mean = gms.iter().sum::<f64>() / 3.0;
    let var = gms.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / 2.0;
    assert!((a.mean.gm - mean).abs() < 1e-12);
    assert!((a.std.gm - var.sqrt()).abs() < 1e-12);
}

#[test]
fn chosen_parameters_come_from_the_grid() {
    let data = blobs_with_ring(30, 30, 10);
    let spec: ModelSpec = "ssvdd-gamma-knn+rbf".parse().unwrap();
    let cfg = small_config();
    let cv = cross_validate(&data, &spec, &cfg.grid, 3, 0, &cfg.fit).unwrap();
    let points = cfg.grid.points(&spec, 2).unwrap();
    assert!(points.contains(&cv.best));
    assert_eq!(cv.table.len(), points.len());
    let best_gm = cv
        .table
        .iter()
        .filter_map(|e| e.mean_gm)
        .fold(f64::NEG_INFINITY, f64::max);
    assert!((cv.best_gm - best_gm).abs() < 1e-12);
}
