//! Run configuration: a flat `key=value` file merged with command-line
//! overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use occ_core::eval::{
    FitOptions, GridSpec, KernelChoice, ModelKind, ModelSpec, Param, ProtocolConfig,
};
use occ_core::ssvdd::ProjectionInit;

/// Keys accepted in config files and `--set`.
pub const KNOWN_KEYS: &[&str] = &[
    "data.path",
    "data.label",
    "data.positive",
    "model.kind",
    "model.kernel",
    "split.seed",
    "split.repeats",
    "split.fraction",
    "train.split",
    "cv.folds",
    "cv.seed",
    "grid.preset",
    "grid.c",
    "grid.nu",
    "grid.beta",
    "grid.eta",
    "grid.d",
    "grid.sigma",
    "grid.k",
    "grid.clusters",
    "fit.iters",
    "fit.init",
    "fit.seed",
    "smo.tol",
    "smo.max_iter",
    "sweep.param",
    "sweep.values",
    "output.dir",
];

/// Parses `key=value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            anyhow!(
                "config line {}: expected key=value, found '{line}'",
                lineno + 1
            )
        })?;
        let key = key.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            bail!("config line {}: unknown key '{key}'", lineno + 1);
        }
        out.insert(key, value.trim().to_string());
    }
    Ok(out)
}

pub fn parse_override(s: &str) -> Result<(String, String)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| anyhow!("--set expects KEY=VALUE, found '{s}'"))?;
    let k = k.trim().to_string();
    if !KNOWN_KEYS.contains(&k.as_str()) {
        bail!("unknown config key '{k}'");
    }
    Ok((k, v.trim().to_string()))
}

/// Fully resolved settings for one command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub data: Option<PathBuf>,
    pub label: String,
    pub positive: String,
    pub models: Vec<ModelKind>,
    pub kernels: Vec<KernelChoice>,
    pub split_seed: u64,
    pub repeats: usize,
    pub fraction: f64,
    pub train_split: Option<usize>,
    pub protocol: ProtocolConfig,
    pub sweep_param: Option<Param>,
    pub sweep_values: Vec<f64>,
    pub out: PathBuf,
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>()
        .map_err(|e| anyhow!("invalid value '{v}' for {key}: {e}"))
}

pub fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for part in v.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        // integer ranges such as 2..10 (inclusive)
        if let Some((a, b)) = part.split_once("..") {
            let a: i64 = parse_num(key, a)?;
            let b: i64 = parse_num(key, b)?;
            if a > b {
                bail!("invalid range '{part}' for {key}");
            }
            out.extend((a..=b).map(|x| x as f64));
        } else {
            out.push(parse_num(key, part)?);
        }
    }
    if out.is_empty() {
        bail!("{key} must list at least one value");
    }
    Ok(out)
}

fn parse_models(v: &str) -> Result<Vec<ModelKind>> {
    if v.trim().eq_ignore_ascii_case("all") {
        return Ok(ModelKind::ALL.to_vec());
    }
    v.split(',')
        .map(|s| {
            s.trim()
                .parse::<ModelKind>()
                .map_err(|e| anyhow!("model.kind: {e}"))
        })
        .collect()
}

fn parse_kernels(v: &str) -> Result<Vec<KernelChoice>> {
    if v.trim().eq_ignore_ascii_case("both") {
        return Ok(vec![KernelChoice::None, KernelChoice::Rbf]);
    }
    Ok(vec![v
        .parse::<KernelChoice>()
        .map_err(|e| anyhow!("model.kernel: {e}"))?])
}

impl RunConfig {
    /// Builds the configuration from merged key/value pairs. `default_kernel`
    /// applies when `model.kernel` is absent.
    pub fn from_pairs(pairs: &BTreeMap<String, String>, default_kernel: &str) -> Result<Self> {
        let get = |k: &str| pairs.get(k).map(String::as_str);

        let mut grid = match get("grid.preset").unwrap_or("default") {
            "default" => GridSpec::default(),
            "compact" => GridSpec::compact(),
            other => bail!("grid.preset: unknown preset '{other}' (expected default or compact)"),
        };
        for (key, param) in [
            ("grid.c", Param::C),
            ("grid.nu", Param::Nu),
            ("grid.beta", Param::Beta),
            ("grid.eta", Param::Eta),
            ("grid.d", Param::D),
            ("grid.sigma", Param::Sigma),
            ("grid.k", Param::K),
            ("grid.clusters", Param::Clusters),
        ] {
            if let Some(v) = get(key) {
                grid.set_values(param, parse_list(key, v)?);
            }
        }

        let mut fit = FitOptions::default();
        if let Some(v) = get("fit.iters") {
            fit.n_iters = parse_num("fit.iters", v)?;
        }
        if let Some(v) = get("fit.init") {
            fit.init = match v {
                "pca" => ProjectionInit::Pca,
                "random" => ProjectionInit::RandomOrthonormal,
                other => bail!("fit.init: '{other}' is not one of pca, random"),
            };
        }
        if let Some(v) = get("fit.seed") {
            fit.seed = parse_num("fit.seed", v)?;
        }
        if let Some(v) = get("smo.tol") {
            fit.smo.tol = parse_num("smo.tol", v)?;
        }
        if let Some(v) = get("smo.max_iter") {
            fit.smo.max_iter = parse_num("smo.max_iter", v)?;
        }

        let split_seed = match get("split.seed") {
            Some(v) => parse_num("split.seed", v)?,
            None => 0,
        };
        let cv_seed = match get("cv.seed") {
            Some(v) => parse_num("cv.seed", v)?,
            None => split_seed,
        };
        let folds = match get("cv.folds") {
            Some(v) => parse_num("cv.folds", v)?,
            None => 5,
        };

        let sweep_param = get("sweep.param").map(|v| v.parse::<Param>()).transpose()?;
        let sweep_values = match get("sweep.values") {
            Some(v) => parse_list("sweep.values", v)?,
            None => Vec::new(),
        };

        Ok(Self {
            data: get("data.path").map(PathBuf::from),
            label: get("data.label").unwrap_or("label").to_string(),
            positive: get("data.positive").unwrap_or("target").to_string(),
            models: parse_models(get("model.kind").unwrap_or("all"))?,
            kernels: parse_kernels(get("model.kernel").unwrap_or(default_kernel))?,
            split_seed,
            repeats: match get("split.repeats") {
                Some(v) => parse_num("split.repeats", v)?,
                None => 5,
            },
            fraction: match get("split.fraction") {
                Some(v) => parse_num("split.fraction", v)?,
                None => 0.7,
            },
            train_split: get("train.split")
                .map(|v| parse_num("train.split", v))
                .transpose()?,
            protocol: ProtocolConfig {
                grid,
                folds,
                cv_seed,
                fit,
            },
            sweep_param,
            sweep_values,
            out: PathBuf::from(get("output.dir").unwrap_or("occ-out")),
        })
    }

    pub fn specs(&self) -> Vec<ModelSpec> {
        let mut out = Vec::new();
        for &kernel in &self.kernels {
            for &kind in &self.models {
                out.push(ModelSpec::new(kind, kernel));
            }
        }
        out
    }

    pub fn single_spec(&self) -> Result<ModelSpec> {
        match (self.models.as_slice(), self.kernels.as_slice()) {
            ([kind], [kernel]) => Ok(ModelSpec::new(*kind, *kernel)),
            _ => bail!(
                "this command needs exactly one model (--model) and one kernel (--kernel none|rbf)"
            ),
        }
    }

    pub fn data_path(&self) -> Result<&Path> {
        let p = self
            .data
            .as_deref()
            .context("no dataset given (use --data or data.path)")?;
        if !p.exists() {
            bail!("dataset not found: {}", p.display());
        }
        Ok(p)
    }
}
