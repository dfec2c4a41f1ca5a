//! Metrics, grid search by geometric mean and the repeated train/test
//! protocol.

pub mod grid;
pub mod metrics;
pub mod model;
pub mod protocol;
pub mod report;

pub use grid::{GridSpec, HyperParams, KernelChoice, ModelKind, ModelSpec, Param, SsvddVariant};
pub use metrics::{aggregate, compute_metrics, MetricsReport, MetricsSummary, METRIC_NAMES};
pub use model::{FitOptions, LinearModel, TrainedModel};
pub use protocol::{
    cross_validate, run_experiment, run_sweep, CvEntry, CvOutcome, ExperimentResult,
    ProtocolConfig, SplitResult, SweepResult, SweepRow,
};
pub use report::{markdown_table, metrics_csv, sweep_csv};
