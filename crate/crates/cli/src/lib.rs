//! Command-line front-end: train, evaluate, experiment and sweep.

pub mod commands;
pub mod config;
pub mod output;

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "occ", version, about = "One-class classification experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit one model (hyperparameters chosen by cross-validation) and save it.
    Train(CommonArgs),
    /// Score a dataset with a saved model.
    Evaluate(EvaluateArgs),
    /// Run the repeated train/test protocol for every requested model.
    Experiment(CommonArgs),
    /// Vary one hyperparameter with the others held at their CV choice.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// CSV dataset with a header row.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Name of the label column.
    #[arg(long)]
    pub label: Option<String>,
    /// Label value of the target class.
    #[arg(long)]
    pub positive: Option<String>,
    /// Model kind, a comma list, or `all`.
    #[arg(long)]
    pub model: Option<String>,
    /// `none`, `rbf`, or `both` (experiment).
    #[arg(long)]
    pub kernel: Option<String>,
    /// Shorthand for `--kernel none`.
    #[arg(long, conflicts_with = "kernel")]
    pub no_kernel: bool,
    /// Flat `key=value` config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Seed for splits (and folds unless `cv.seed` is set).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Override any config key, e.g. `--set grid.c=0.1,0.2`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    /// Model file written by `train`.
    #[arg(long)]
    pub model_file: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "label")]
    pub label: String,
    #[arg(long, default_value = "target")]
    pub positive: String,
    #[arg(long, default_value = "occ-out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Hyperparameter to vary (c, nu, beta, eta, d, sigma, k, clusters).
    #[arg(long)]
    pub param: Option<String>,
    /// Comma list of values; integer ranges like `2..10` are expanded.
    #[arg(long)]
    pub values: Option<String>,
}

impl CommonArgs {
    /// Config file first, then `--set`, then dedicated flags.
    pub fn merged_pairs(&self) -> Result<BTreeMap<String, String>> {
        let mut pairs = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading config {}", path.display()))?;
                config::parse_config(&text)
                    .with_context(|| format!("in config {}", path.display()))?
            }
            None => BTreeMap::new(),
        };
        for s in &self.overrides {
            let (k, v) = config::parse_override(s)?;
            pairs.insert(k, v);
        }
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                pairs.insert(k.to_string(), v);
            }
        };
        put(
            "data.path",
            self.data.as_ref().map(|p| p.display().to_string()),
        );
        put("data.label", self.label.clone());
        put("data.positive", self.positive.clone());
        put("model.kind", self.model.clone());
        put("model.kernel", self.kernel.clone());
        put("model.kernel", self.no_kernel.then(|| "none".to_string()));
        put("split.seed", self.seed.map(|s| s.to_string()));
        put(
            "output.dir",
            self.out.as_ref().map(|p| p.display().to_string()),
        );
        Ok(pairs)
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(args) => {
            let cfg = config::RunConfig::from_pairs(&args.merged_pairs()?, "none")?;
            commands::train(&cfg)
        }
        Command::Evaluate(args) => commands::evaluate(&args),
        Command::Experiment(args) => {
            let cfg = config::RunConfig::from_pairs(&args.merged_pairs()?, "both")?;
            commands::experiment(&cfg)
        }
        Command::Sweep(args) => {
            let mut pairs = args.common.merged_pairs()?;
            if let Some(p) = args.param {
                pairs.insert("sweep.param".into(), p);
            }
            if let Some(v) = args.values {
                pairs.insert("sweep.values".into(), v);
            }
            let cfg = config::RunConfig::from_pairs(&pairs, "none")?;
            commands::sweep(&cfg)
        }
    }
}
