//! Labeled feature data: CSV ingestion, target-class normalization,
//! stratified train/test splits and stratified k-fold partitions.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, OccError, Result};

pub mod synthetic;

/// Class of a sample. Only `Target` rows are ever used to fit a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Target,
    Outlier,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Target => "target",
            Label::Outlier => "outlier",
        }
    }

    pub fn is_target(self) -> bool {
        self == Label::Target
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// N×D feature matrix (one row per sample) with a label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Array2<f64>,
    labels: Vec<Label>,
    feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(
        features: Array2<f64>,
        labels: Vec<Label>,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        let (n, d) = features.dim();
        if n == 0 {
            return Err(OccError::EmptyDataset);
        }
        if d == 0 {
            return Err(invalid(
                "features",
                "at least one feature column is required",
            ));
        }
        if labels.len() != n {
            return Err(OccError::DimensionMismatch {
                expected: n,
                found: labels.len(),
            });
        }
        if feature_names.len() != d {
            return Err(OccError::DimensionMismatch {
                expected: d,
                found: feature_names.len(),
            });
        }
        check_finite(&features)?;
        Ok(Self {
            features,
            labels,
            feature_names,
        })
    }

    /// Builds a dataset with generated feature names `f0..f{D-1}`.
    pub fn from_parts(features: Array2<f64>, labels: Vec<Label>) -> Result<Self> {
        let names = (0..features.ncols()).map(|j| format!("f{j}")).collect();
        Self::new(features, labels, names)
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn count(&self, label: Label) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    /// True when every row carries the same label.
    pub fn is_single_class(&self) -> bool {
        self.count(Label::Target) == 0 || self.count(Label::Outlier) == 0
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.features.row(i)
    }

    /// Rows at `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select(Axis(0), indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            feature_names: self.feature_names.clone(),
        }
    }

    /// Feature matrix restricted to target rows.
    pub fn target_features(&self) -> Array2<f64> {
        let idx: Vec<usize> = (0..self.len())
            .filter(|&i| self.labels[i].is_target())
            .collect();
        self.features.select(Axis(0), &idx)
    }

    pub fn with_features(&self, features: Array2<f64>) -> Result<Dataset> {
        Dataset::new(features, self.labels.clone(), self.feature_names.clone())
    }
}

fn check_finite(m: &Array2<f64>) -> Result<()> {
    for ((row, col), v) in m.indexed_iter() {
        if !v.is_finite() {
            return Err(OccError::NonFinite { row, col });
        }
    }
    Ok(())
}

/// Reads a headed CSV file. `positive_label` maps to [`Label::Target`], every
/// other label value to [`Label::Outlier`]. Reported row numbers are file
/// line numbers (the header is line 1).
pub fn load_csv(
    path: impl AsRef<Path>,
    label_column: &str,
    positive_label: &str,
) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| OccError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file, path, label_column, positive_label)
}

pub(crate) fn read_csv<R: std::io::Read>(
    reader: R,
    path: &Path,
    label_column: &str,
    positive_label: &str,
) -> Result<Dataset> {
    let csv_err = |e: csv::Error| OccError::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    if headers.is_empty() || headers.iter().all(|h| h.trim().is_empty()) {
        return Err(OccError::MissingHeader(path.to_path_buf()));
    }
    let names: Vec<String> = headers.iter().map(|h| h.trim().to_string()).collect();
    let mut seen = HashSet::new();
    for name in &names {
        if !seen.insert(name.as_str()) {
            return Err(OccError::DuplicateHeader(name.clone()));
        }
    }
    let label_idx = names
        .iter()
        .position(|n| n == label_column)
        .ok_or_else(|| OccError::MissingLabelColumn(label_column.to_string()))?;
    let feature_names: Vec<String> = names
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != label_idx)
        .map(|(_, n)| n.clone())
        .collect();

    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (r, record) in rdr.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let line = r + 2;
        if record.len() != names.len() {
            return Err(OccError::RaggedRow {
                row: line,
                found: record.len(),
                expected: names.len(),
            });
        }
        for (j, cell) in record.iter().enumerate() {
            if j == label_idx {
                continue;
            }
            let cell = cell.trim();
            let v: f64 = match cell.parse() {
                Ok(v) if f64::is_finite(v) => v,
                _ => {
                    return Err(OccError::BadCell {
                        row: line,
                        column: names[j].clone(),
                        value: cell.to_string(),
                    })
                }
            };
            values.push(v);
        }
        let label = if record[label_idx].trim() == positive_label {
            Label::Target
        } else {
            Label::Outlier
        };
        labels.push(label);
    }
    if labels.is_empty() {
        return Err(OccError::EmptyDataset);
    }
    let features = Array2::from_shape_vec((labels.len(), feature_names.len()), values)
        .expect("row lengths checked above");
    Dataset::new(features, labels, feature_names)
}

/// Per-feature z-score statistics taken from target rows only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationStats {
    pub mean: Array1<f64>,
    pub std: Array1<f64>,
}

impl NormalizationStats {
    pub fn identity(dim: usize) -> Self {
        Self {
            mean: Array1::zeros(dim),
            std: Array1::ones(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn transform(&self, data: &Array2<f64>) -> Result<Array2<f64>> {
        if data.ncols() != self.dim() {
            return Err(OccError::DimensionMismatch {
                expected: self.dim(),
                found: data.ncols(),
            });
        }
        Ok((data - &self.mean) / &self.std)
    }

    pub fn transform_row(&self, row: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        if row.len() != self.dim() {
            return Err(OccError::DimensionMismatch {
                expected: self.dim(),
                found: row.len(),
            });
        }
        Ok((&row - &self.mean) / &self.std)
    }
}

/// Fits mean and population std over the target rows of `train`.
/// Zero-variance columns get std 1.
pub fn fit_normalizer(train: &Dataset) -> Result<NormalizationStats> {
    let targets = train.target_features();
    if targets.nrows() == 0 {
        return Err(OccError::NoTargetSamples);
    }
    Ok(fit_stats(&targets))
}

pub(crate) fn fit_stats(rows: &Array2<f64>) -> NormalizationStats {
    let mean = rows.mean_axis(Axis(0)).expect("non-empty");
    let std = rows
        .std_axis(Axis(0), 0.0)
        .mapv(|s| if s > 0.0 { s } else { 1.0 });
    NormalizationStats { mean, std }
}

pub fn apply_normalizer(stats: &NormalizationStats, data: &Dataset) -> Result<Dataset> {
    let features = stats.transform(data.features())?;
    data.with_features(features)
}

/// One train/test partition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Repeated stratified train/test partitions.
///
/// Repeat `r` shuffles each class with its own ChaCha8 stream: the generator
/// is seeded with `seed` and switched to stream `r`, so repeats are
/// independent yet reproducible from one seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub seed: u64,
    pub n_repeats: usize,
    pub train_fraction: f64,
    pub splits: Vec<Split>,
}

fn class_indices(labels: &[Label]) -> [Vec<usize>; 2] {
    let mut target = Vec::new();
    let mut outlier = Vec::new();
    for (i, l) in labels.iter().enumerate() {
        match l {
            Label::Target => target.push(i),
            Label::Outlier => outlier.push(i),
        }
    }
    [target, outlier]
}

fn require_class_size(classes: &[Vec<usize>; 2], required: usize) -> Result<()> {
    for (name, idx) in ["target", "outlier"].into_iter().zip(classes.iter()) {
        if idx.len() < required {
            return Err(OccError::ClassTooSmall {
                class: name,
                count: idx.len(),
                required,
            });
        }
    }
    Ok(())
}

pub fn make_split_plan(
    dataset: &Dataset,
    seed: u64,
    n_repeats: usize,
    train_fraction: f64,
) -> Result<SplitPlan> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(invalid(
            "train_fraction",
            format!("{train_fraction} is not in (0, 1)"),
        ));
    }
    if n_repeats == 0 {
        return Err(invalid("n_repeats", "must be at least 1"));
    }
    let classes = class_indices(dataset.labels());
    require_class_size(&classes, 2)?;

    let splits = (0..n_repeats)
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let mut train = Vec::new();
            let mut test = Vec::new();
            for idx in &classes {
                let mut idx = idx.clone();
                idx.shuffle(&mut rng);
                let n_train =
                    ((idx.len() as f64 * train_fraction).round() as usize).clamp(1, idx.len() - 1);
                train.extend_from_slice(&idx[..n_train]);
                test.extend_from_slice(&idx[n_train..]);
            }
            train.sort_unstable();
            test.sort_unstable();
            Split { train, test }
        })
        .collect();

    Ok(SplitPlan {
        seed,
        n_repeats,
        train_fraction,
        splits,
    })
}

/// One cross-validation fold: fit on the target rows of `fit`, validate on
/// every row of `validate`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub fit: Vec<usize>,
    pub validate: Vec<usize>,
}

/// Stratified k-fold partition of `train`. Indices refer to rows of `train`.
///
/// Each class is shuffled and dealt round-robin over the folds, with the
/// deal position carried from the target class into the outlier class so
/// that fold sizes differ by at most one overall.
pub fn kfold_indices(train: &Dataset, k: usize, seed: u64) -> Result<Vec<Fold>> {
    if k < 2 {
        return Err(invalid("k", "at least 2 folds are required"));
    }
    let classes = class_indices(train.labels());
    require_class_size(&classes, k)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut members = vec![Vec::new(); k];
    let mut pos = 0usize;
    for idx in &classes {
        let mut idx = idx.clone();
        idx.shuffle(&mut rng);
        for i in idx {
            members[pos % k].push(i);
            pos += 1;
        }
    }
    let folds = (0..k)
        .map(|f| {
            let mut validate = members[f].clone();
            validate.sort_unstable();
            let mut fit: Vec<usize> = members
                .iter()
                .enumerate()
                .filter(|&(g, _)| g != f)
                .flat_map(|(_, m)| m.iter().copied())
                .collect();
            fit.sort_unstable();
            Fold { fit, validate }
        })
        .collect();
    Ok(folds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn labels(pattern: &[u8]) -> Vec<Label> {
        pattern
            .iter()
            .map(|&b| {
                if b == 1 {
                    Label::Target
                } else {
                    Label::Outlier
                }
            })
            .collect()
    }

    fn toy(n_target: usize, n_outlier: usize) -> Dataset {
        let n = n_target + n_outlier;
        let features = Array2::from_shape_fn((n, 2), |(i, j)| (i * 2 + j) as f64);
        let mut l = vec![Label::Target; n_target];
        l.extend(vec![Label::Outlier; n_outlier]);
        Dataset::from_parts(features, l).unwrap()
    }

    fn parse(text: &str) -> Result<Dataset> {
        read_csv(text.as_bytes(), Path::new("inline.csv"), "label", "trusted")
    }

    #[test]
    fn csv_maps_positive_label_to_target() {
        let ds =
            parse("a,b,label\n1,2,trusted\n3,4,untrusted\n5,6,trusted\n7,8,trusted\n").unwrap();
        assert_eq!(ds.labels(), labels(&[1, 0, 1, 1]).as_slice());
        assert_eq!(ds.feature_names(), &["a".to_string(), "b".to_string()]);
        assert_eq!(
            ds.features(),
            &array![[1., 2.], [3., 4.], [5., 6.], [7., 8.]]
        );
    }

    #[test]
    fn csv_label_column_may_be_anywhere() {
        let ds = parse("label,x\ntrusted,0.5\nspam,1.5\n").unwrap();
        assert_eq!(ds.n_features(), 1);
        assert_eq!(ds.labels(), labels(&[1, 0]).as_slice());
    }

    #[test]
    fn csv_nan_cell_names_row_and_column() {
        let err = parse("a,b,label\n1,2,trusted\n3,NaN,untrusted\n").unwrap_err();
        match err {
            OccError::BadCell { row, column, value } => {
                assert_eq!(row, 3);
                assert_eq!(column, "b");
                assert_eq!(value, "NaN");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn csv_rejects_garbage_and_infinity() {
        assert!(matches!(
            parse("a,label\nx,trusted\n"),
            Err(OccError::BadCell { .. })
        ));
        assert!(matches!(
            parse("a,label\ninf,trusted\n"),
            Err(OccError::BadCell { .. })
        ));
    }

    #[test]
    fn csv_structural_errors() {
        assert!(matches!(
            parse("a,a,label\n1,2,trusted\n"),
            Err(OccError::DuplicateHeader(_))
        ));
        assert!(matches!(
            parse("a,b\n1,2\n"),
            Err(OccError::MissingLabelColumn(_))
        ));
        assert!(matches!(parse("a,label\n"), Err(OccError::EmptyDataset)));
        assert!(matches!(parse(""), Err(OccError::MissingHeader(_))));
        assert!(matches!(
            parse("a,b,label\n1,trusted\n"),
            Err(OccError::RaggedRow { row: 2, .. })
        ));
    }

    #[test]
    fn csv_missing_file() {
        let err = load_csv("/definitely/not/here.csv", "label", "trusted").unwrap_err();
        assert!(err.to_string().contains("/definitely/not/here.csv"));
    }

    #[test]
    fn csv_single_class_is_loadable() {
        let ds = parse("a,label\n1,trusted\n2,trusted\n").unwrap();
        assert!(ds.is_single_class());
    }

    #[test]
    fn normalizer_hand_values() {
        let ds = Dataset::from_parts(array![[0., 2.], [2., 4.], [100., -50.]], labels(&[1, 1, 0]))
            .unwrap();
        let stats = fit_normalizer(&ds).unwrap();
        assert_eq!(stats.mean, array![1., 3.]);
        assert_eq!(stats.std, array![1., 1.]);
        let normed = apply_normalizer(&stats, &ds).unwrap();
        assert_eq!(normed.row(0), array![-1., -1.]);
        assert_eq!(normed.labels(), ds.labels());
    }

    #[test]
    fn normalizer_zero_std_becomes_one() {
        let ds = Dataset::from_parts(array![[5., 5.]], labels(&[1])).unwrap();
        let stats = fit_normalizer(&ds).unwrap();
        assert_eq!(stats.mean, array![5., 5.]);
        assert_eq!(stats.std, array![1., 1.]);
    }

    #[test]
    fn normalizer_needs_targets() {
        let ds = Dataset::from_parts(array![[1.0]], labels(&[0])).unwrap();
        assert!(matches!(
            fit_normalizer(&ds),
            Err(OccError::NoTargetSamples)
        ));
    }

    #[test]
    fn identity_stats_leave_data_alone() {
        let ds = toy(3, 2);
        let out = apply_normalizer(&NormalizationStats::identity(2), &ds).unwrap();
        assert_eq!(out, ds);
        let bad = NormalizationStats::identity(3);
        assert!(matches!(
            apply_normalizer(&bad, &ds),
            Err(OccError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn split_plan_stratifies_ten_samples() {
        let ds = toy(6, 4);
        let plan = make_split_plan(&ds, 7, 5, 0.7).unwrap();
        assert_eq!(plan.splits.len(), 5);
        for s in &plan.splits {
            let tr = ds.subset(&s.train);
            assert_eq!(tr.count(Label::Target), 4);
            assert_eq!(tr.count(Label::Outlier), 3);
            assert_eq!(s.test.len(), 3);
            let mut all: Vec<usize> = s.train.iter().chain(&s.test).copied().collect();
            all.sort_unstable();
            assert_eq!(all, (0..10).collect::<Vec<_>>());
        }
        assert_eq!(plan, make_split_plan(&ds, 7, 5, 0.7).unwrap());
        assert_ne!(plan, make_split_plan(&ds, 8, 5, 0.7).unwrap());
    }

    #[test]
    fn split_plan_thousand_rows() {
        let ds = toy(600, 400);
        let plan = make_split_plan(&ds, 1, 5, 0.7).unwrap();
        for s in &plan.splits {
            assert_eq!((s.train.len(), s.test.len()), (700, 300));
        }
        for a in 0..5 {
            for b in a + 1..5 {
                assert_ne!(plan.splits[a].train, plan.splits[b].train);
            }
        }
    }

    #[test]
    fn split_plan_errors() {
        assert!(matches!(
            make_split_plan(&toy(5, 1), 0, 1, 0.7),
            Err(OccError::ClassTooSmall { .. })
        ));
        assert!(make_split_plan(&toy(5, 5), 0, 1, 1.0).is_err());
        assert!(make_split_plan(&toy(5, 5), 0, 1, 0.0).is_err());
        assert!(make_split_plan(&toy(5, 5), 0, 0, 0.5).is_err());
    }

    #[test]
    fn kfold_ten_samples_five_folds() {
        let ds = toy(5, 5);
        let folds = kfold_indices(&ds, 5, 3).unwrap();
        assert_eq!(folds.len(), 5);
        let mut union = Vec::new();
        for f in &folds {
            assert_eq!(f.validate.len(), 2);
            assert_eq!(f.fit.len(), 8);
            assert!(f.validate.iter().all(|i| !f.fit.contains(i)));
            union.extend_from_slice(&f.validate);
        }
        union.sort_unstable();
        assert_eq!(union, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn kfold_rejects_small_class() {
        assert!(matches!(
            kfold_indices(&toy(6, 4), 5, 0),
            Err(OccError::ClassTooSmall { .. })
        ));
        assert!(kfold_indices(&toy(6, 4), 1, 0).is_err());
    }
}
