//! CSV and Markdown renderings of experiment results.

use std::fmt::Write as _;

use super::metrics::METRIC_NAMES;
use super::protocol::{ExperimentResult, SweepResult};

pub const METRICS_CSV_HEADER: &str = "model,split,accu,tpr,tnr,pre,f1,gm";

fn push_row(out: &mut String, model: &str, split: &str, values: [f64; 6]) {
    out.push_str(model);
    out.push(',');
    out.push_str(split);
    for v in values {
        let _ = write!(out, ",{v:.6}");
    }
    out.push('\n');
}

/// One row per model and split, followed by `mean` and `std` rows per model.
pub fn metrics_csv(results: &[ExperimentResult]) -> String {
    let mut out = String::from(METRICS_CSV_HEADER);
    out.push('\n');
    for res in results {
        let label = res.spec.label();
        for s in &res.splits {
            push_row(&mut out, &label, &s.repeat.to_string(), s.metrics.values());
        }
        push_row(&mut out, &label, "mean", res.mean.values());
        push_row(&mut out, &label, "std", res.std.values());
    }
    out
}

fn table(out: &mut String, title: &str, rows: &[&ExperimentResult]) {
    if rows.is_empty() {
        return;
    }
    let _ = writeln!(out, "### {title}\n");
    out.push_str("| Model | Accu | TPR | TNR | Pre | F1 | GM |\n");
    out.push_str("|---|---|---|---|---|---|---|\n");
    for res in rows {
        let _ = write!(out, "| {} |", res.spec.kind.name());
        for (m, s) in res.mean.values().iter().zip(res.std.values()) {
            let _ = write!(out, " {m:.2} ± {s:.2} |");
        }
        out.push('\n');
    }
    out.push('\n');
}

/// Linear and kernelized models in separate tables, columns in metric order.
pub fn markdown_table(results: &[ExperimentResult]) -> String {
    let linear: Vec<&ExperimentResult> =
        results.iter().filter(|r| !r.spec.is_kernelized()).collect();
    let kernel: Vec<&ExperimentResult> =
        results.iter().filter(|r| r.spec.is_kernelized()).collect();
    let mut out = String::new();
    table(&mut out, "Linear OCC", &linear);
    table(&mut out, "Non-linear OCC", &kernel);
    out
}

/// One row per swept value with mean metrics over repeats.
pub fn sweep_csv(sweep: &SweepResult) -> String {
    let mut out = format!("model,{}", sweep.param.name());
    for name in METRIC_NAMES {
        let _ = write!(out, ",{name}");
    }
    out.push('\n');
    let label = sweep.spec.label();
    for row in &sweep.rows {
        let _ = write!(out, "{label},{}", row.value);
        for v in row.mean.values() {
            let _ = write!(out, ",{v:.6}");
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::NormalizationStats;
    use crate::eval::grid::{HyperParams, KernelChoice, ModelKind, ModelSpec};
    use crate::eval::metrics::{aggregate, MetricsReport};
    use crate::eval::protocol::SplitResult;

    fn result(kernel: KernelChoice) -> ExperimentResult {
        let reports = [
            MetricsReport::from_counts(3, 1, 2, 2),
            MetricsReport::from_counts(4, 0, 4, 0),
        ];
        let (mean, std) = aggregate(&reports);
        ExperimentResult {
            spec: ModelSpec::new(ModelKind::Svdd, kernel),
            splits: reports
                .iter()
                .enumerate()
                .map(|(i, &m)| SplitResult {
                    repeat: i,
                    params: HyperParams::default(),
                    cv_gm: 0.0,
                    metrics: m,
                    normalizer: NormalizationStats::identity(1),
                })
                .collect(),
            mean,
            std,
        }
    }

    #[test]
    fn csv_layout() {
        let csv = metrics_csv(&[result(KernelChoice::None)]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], METRICS_CSV_HEADER);
        assert_eq!(lines.len(), 1 + 2 + 2);
        assert!(lines[1].starts_with("svdd,0,0.625000,0.750000"));
        assert!(lines[3].starts_with("svdd,mean,"));
        assert!(lines[4].starts_with("svdd,std,"));
    }

    #[test]
    fn markdown_cells() {
        let md = markdown_table(&[result(KernelChoice::None), result(KernelChoice::Rbf)]);
        assert!(md.contains("### Linear OCC"));
        assert!(md.contains("### Non-linear OCC"));
        // accu mean (0.625 + 1) / 2, sample std 0.265
        assert!(md.contains("| 0.81 ± 0.27 |"), "{md}");
    }
}
