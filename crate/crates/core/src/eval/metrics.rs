use serde::{Deserialize, Serialize};

use crate::error::{OccError, Result};
use crate::Label;

/// Confusion counts and derived rates, with the target class as positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub tp: usize,
    pub fn_: usize,
    pub tn: usize,
    pub fp: usize,
    pub accu: f64,
    pub tpr: f64,
    pub tnr: f64,
    pub pre: f64,
    pub f1: f64,
    pub gm: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl MetricsReport {
    /// Builds a report from confusion counts. Rates with a zero denominator
    /// are reported as 0.
    pub fn from_counts(tp: usize, fn_: usize, tn: usize, fp: usize) -> Self {
        let accu = ratio(tp + tn, tp + tn + fp + fn_);
        let tpr = ratio(tp, tp + fn_);
        let tnr = ratio(tn, tn + fp);
        let pre = ratio(tp, tp + fp);
        let f1 = if pre + tpr > 0.0 {
            2.0 * pre * tpr / (pre + tpr)
        } else {
            0.0
        };
        let gm = (tpr * tnr).sqrt();
        Self {
            tp,
            fn_,
            tn,
            fp,
            accu,
            tpr,
            tnr,
            pre,
            f1,
            gm,
        }
    }

    /// The six rates in reporting order: Accu, TPR, TNR, Pre, F1, GM.
    pub fn values(&self) -> [f64; 6] {
        [self.accu, self.tpr, self.tnr, self.pre, self.f1, self.gm]
    }
}

pub const METRIC_NAMES: [&str; 6] = ["accu", "tpr", "tnr", "pre", "f1", "gm"];

pub fn compute_metrics(predictions: &[Label], truth: &[Label]) -> Result<MetricsReport> {
    if predictions.len() != truth.len() {
        return Err(OccError::DimensionMismatch {
            expected: truth.len(),
            found: predictions.len(),
        });
    }
    if truth.is_empty() {
        return Err(OccError::EmptyDataset);
    }
    let (mut tp, mut fn_, mut tn, mut fp) = (0, 0, 0, 0);
    for (p, t) in predictions.iter().zip(truth) {
        match (t, p) {
            (Label::Target, Label::Target) => tp += 1,
            (Label::Target, Label::Outlier) => fn_ += 1,
            (Label::Outlier, Label::Outlier) => tn += 1,
            (Label::Outlier, Label::Target) => fp += 1,
        }
    }
    Ok(MetricsReport::from_counts(tp, fn_, tn, fp))
}

/// Per-metric statistic across splits, in reporting order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub accu: f64,
    pub tpr: f64,
    pub tnr: f64,
    pub pre: f64,
    pub f1: f64,
    pub gm: f64,
}

impl MetricsSummary {
    fn from_values(v: [f64; 6]) -> Self {
        Self {
            accu: v[0],
            tpr: v[1],
            tnr: v[2],
            pre: v[3],
            f1: v[4],
            gm: v[5],
        }
    }

    pub fn values(&self) -> [f64; 6] {
        [self.accu, self.tpr, self.tnr, self.pre, self.f1, self.gm]
    }
}

/// Mean and sample standard deviation (n − 1 denominator, 0 for a single
/// report).
pub fn aggregate(reports: &[MetricsReport]) -> (MetricsSummary, MetricsSummary) {
    let n = reports.len();
    let mut mean = [0.0; 6];
    let mut std = [0.0; 6];
    if n == 0 {
        return (
            MetricsSummary::from_values(mean),
            MetricsSummary::from_values(std),
        );
    }
    for r in reports {
        for (m, v) in mean.iter_mut().zip(r.values()) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= n as f64;
    }
    if n > 1 {
        for r in reports {
            for ((s, v), m) in std.iter_mut().zip(r.values()).zip(mean) {
                *s += (v - m) * (v - m);
            }
        }
        for s in std.iter_mut() {
            *s = (*s / (n - 1) as f64).sqrt();
        }
    }
    (
        MetricsSummary::from_values(mean),
        MetricsSummary::from_values(std),
    )
}
