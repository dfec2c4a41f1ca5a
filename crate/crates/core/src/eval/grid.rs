//! Model recipes and hyperparameter grids.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, OccError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SsvddVariant {
    Psi1,
    Psi2,
    Psi3,
    Psi4,
    GammaKnn,
    GammaWithin,
    GammaBetween,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Svdd,
    Ocsvm,
    Ssvdd(SsvddVariant),
}

impl ModelKind {
    pub const ALL: [ModelKind; 9] = [
        ModelKind::Ssvdd(SsvddVariant::Psi1),
        ModelKind::Ssvdd(SsvddVariant::Psi2),
        ModelKind::Ssvdd(SsvddVariant::Psi3),
        ModelKind::Ssvdd(SsvddVariant::Psi4),
        ModelKind::Ocsvm,
        ModelKind::Svdd,
        ModelKind::Ssvdd(SsvddVariant::GammaKnn),
        ModelKind::Ssvdd(SsvddVariant::GammaBetween),
        ModelKind::Ssvdd(SsvddVariant::GammaWithin),
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Svdd => "svdd",
            ModelKind::Ocsvm => "ocsvm",
            ModelKind::Ssvdd(v) => match v {
                SsvddVariant::Psi1 => "ssvdd-psi1",
                SsvddVariant::Psi2 => "ssvdd-psi2",
                SsvddVariant::Psi3 => "ssvdd-psi3",
                SsvddVariant::Psi4 => "ssvdd-psi4",
                SsvddVariant::GammaKnn => "ssvdd-gamma-knn",
                SsvddVariant::GammaWithin => "ssvdd-gamma-within",
                SsvddVariant::GammaBetween => "ssvdd-gamma-between",
            },
        }
    }

    /// Hyperparameters this kind consumes (the kernel width is added by the
    /// kernel choice).
    pub fn parameters(self) -> &'static [Param] {
        use Param::*;
        match self {
            ModelKind::Svdd => &[C],
            ModelKind::Ocsvm => &[Nu],
            ModelKind::Ssvdd(SsvddVariant::Psi1) => &[C, D, Eta],
            ModelKind::Ssvdd(SsvddVariant::GammaKnn) => &[C, D, Eta, Beta, K],
            ModelKind::Ssvdd(SsvddVariant::GammaWithin | SsvddVariant::GammaBetween) => {
                &[C, D, Eta, Beta, Clusters]
            }
            ModelKind::Ssvdd(_) => &[C, D, Eta, Beta],
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

const OUT_OF_SCOPE: [&str; 4] = ["esvdd", "geocsvm", "gesvdd", "gessvdd"];

impl FromStr for ModelKind {
    type Err = OccError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        if OUT_OF_SCOPE.contains(&key.as_str()) {
            return Err(OccError::OutOfScopeModel(key));
        }
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == key)
            .ok_or(OccError::UnknownModel(key))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelChoice {
    #[default]
    None,
    Rbf,
}

impl FromStr for KernelChoice {
    type Err = OccError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" | "linear" => Ok(KernelChoice::None),
            "rbf" => Ok(KernelChoice::Rbf),
            other => Err(invalid(
                "kernel",
                format!("'{other}' is not one of none, rbf"),
            )),
        }
    }
}

/// A model kind together with its kernelization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub kernel: KernelChoice,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, kernel: KernelChoice) -> Self {
        Self { kind, kernel }
    }

    pub fn is_kernelized(&self) -> bool {
        self.kernel == KernelChoice::Rbf
    }

    /// `ssvdd-gamma-knn` for the linear model, `ssvdd-gamma-knn+rbf` for
    /// the kernelized one.
    pub fn label(&self) -> String {
        match self.kernel {
            KernelChoice::None => self.kind.name().to_string(),
            KernelChoice::Rbf => format!("{}+rbf", self.kind.name()),
        }
    }

    pub fn parameters(&self) -> Vec<Param> {
        let mut p = self.kind.parameters().to_vec();
        if self.is_kernelized() {
            p.push(Param::Sigma);
        }
        p
    }

    pub fn uses(&self, param: Param) -> bool {
        self.parameters().contains(&param)
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for ModelSpec {
    type Err = OccError;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once('+') {
            Some((kind, kernel)) => Ok(ModelSpec::new(kind.parse()?, kernel.parse()?)),
            None => Ok(ModelSpec::new(s.parse()?, KernelChoice::None)),
        }
    }
}

/// One tunable hyperparameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Param {
    C,
    Nu,
    Beta,
    Eta,
    D,
    /// Kernel width as a multiple of the median pairwise distance.
    Sigma,
    K,
    Clusters,
}

impl Param {
    pub fn name(self) -> &'static str {
        match self {
            Param::C => "c",
            Param::Nu => "nu",
            Param::Beta => "beta",
            Param::Eta => "eta",
            Param::D => "d",
            Param::Sigma => "sigma",
            Param::K => "k",
            Param::Clusters => "clusters",
        }
    }
}

impl FromStr for Param {
    type Err = OccError;

    fn from_str(s: &str) -> Result<Self> {
        let p = match s.trim().to_ascii_lowercase().as_str() {
            "c" => Param::C,
            "nu" => Param::Nu,
            "beta" => Param::Beta,
            "eta" => Param::Eta,
            "d" => Param::D,
            "sigma" => Param::Sigma,
            "k" => Param::K,
            "clusters" | "n_clusters" => Param::Clusters,
            other => {
                return Err(invalid(
                    "param",
                    format!("unknown hyperparameter '{other}'"),
                ))
            }
        };
        Ok(p)
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A concrete hyperparameter assignment. Fields the model does not use are
/// `None`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HyperParams {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub nu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub d: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub clusters: Option<usize>,
}

impl HyperParams {
    pub fn get(&self, p: Param) -> Option<f64> {
        match p {
            Param::C => self.c,
            Param::Nu => self.nu,
            Param::Beta => self.beta,
            Param::Eta => self.eta,
            Param::D => self.d.map(|v| v as f64),
            Param::Sigma => self.sigma,
            Param::K => self.k.map(|v| v as f64),
            Param::Clusters => self.clusters.map(|v| v as f64),
        }
    }

    pub fn set(&mut self, p: Param, value: f64) {
        match p {
            Param::C => self.c = Some(value),
            Param::Nu => self.nu = Some(value),
            Param::Beta => self.beta = Some(value),
            Param::Eta => self.eta = Some(value),
            Param::D => self.d = Some(value as usize),
            Param::Sigma => self.sigma = Some(value),
            Param::K => self.k = Some(value as usize),
            Param::Clusters => self.clusters = Some(value as usize),
        }
    }

    pub(crate) fn require(&self, p: Param) -> Result<f64> {
        self.get(p)
            .ok_or_else(|| invalid("hyperparameters", format!("missing value for {}", p.name())))
    }
}

impl fmt::Display for HyperParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let all = [
            Param::C,
            Param::Nu,
            Param::Beta,
            Param::Eta,
            Param::D,
            Param::Sigma,
            Param::K,
            Param::Clusters,
        ];
        let parts: Vec<String> = all
            .iter()
            .filter_map(|&p| self.get(p).map(|v| format!("{}={}", p.name(), v)))
            .collect();
        f.write_str(&parts.join(" "))
    }
}

/// Candidate values per hyperparameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub c: Vec<f64>,
    pub nu: Vec<f64>,
    pub beta: Vec<f64>,
    pub eta: Vec<f64>,
    /// `None` means every d from 1 up to `min(D, MAX_DEFAULT_D)`.
    pub d: Option<Vec<usize>>,
    pub sigma: Vec<f64>,
    pub k: Vec<usize>,
    pub clusters: Vec<usize>,
}

/// Cap on the automatic d range; kernel maps can have hundreds of columns.
pub const MAX_DEFAULT_D: usize = 10;

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            c: vec![0.05, 0.1, 0.2, 0.3, 0.4, 0.5],
            nu: vec![0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5],
            beta: vec![1e-3, 1e-2, 1e-1, 1.0, 10.0],
            eta: vec![1e-4, 1e-3, 1e-2, 1e-1],
            d: None,
            sigma: vec![0.25, 0.5, 1.0, 2.0, 4.0],
            k: (2..=10).collect(),
            clusters: (2..=10).collect(),
        }
    }
}

impl GridSpec {
    /// A small grid that keeps full experiments in the minutes range.
    pub fn compact() -> Self {
        Self {
            c: vec![0.05, 0.1, 0.3],
            nu: vec![0.05, 0.1, 0.3],
            beta: vec![1e-2, 1.0],
            eta: vec![1e-2],
            d: Some(vec![1, 2, 3]),
            sigma: vec![0.5, 1.0, 2.0],
            k: vec![5],
            clusters: vec![3],
        }
    }

    /// Every value of every parameter.
    pub fn single(params: &HyperParams) -> Self {
        let f = |v: Option<f64>| v.into_iter().collect::<Vec<_>>();
        let u = |v: Option<usize>| v.into_iter().collect::<Vec<_>>();
        Self {
            c: f(params.c),
            nu: f(params.nu),
            beta: f(params.beta),
            eta: f(params.eta),
            d: Some(u(params.d)),
            sigma: f(params.sigma),
            k: u(params.k),
            clusters: u(params.clusters),
        }
    }

    pub fn values(&self, p: Param, input_dim: usize) -> Vec<f64> {
        let us = |v: &[usize]| v.iter().map(|&x| x as f64).collect::<Vec<_>>();
        match p {
            Param::C => self.c.clone(),
            Param::Nu => self.nu.clone(),
            Param::Beta => self.beta.clone(),
            Param::Eta => self.eta.clone(),
            Param::D => match &self.d {
                Some(d) => us(d),
                None => (1..=input_dim.clamp(1, MAX_DEFAULT_D))
                    .map(|x| x as f64)
                    .collect(),
            },
            Param::Sigma => self.sigma.clone(),
            Param::K => us(&self.k),
            Param::Clusters => us(&self.clusters),
        }
    }

    pub fn set_values(&mut self, p: Param, values: Vec<f64>) {
        let us = |v: Vec<f64>| v.into_iter().map(|x| x as usize).collect::<Vec<_>>();
        match p {
            Param::C => self.c = values,
            Param::Nu => self.nu = values,
            Param::Beta => self.beta = values,
            Param::Eta => self.eta = values,
            Param::D => self.d = Some(us(values)),
            Param::Sigma => self.sigma = values,
            Param::K => self.k = us(values),
            Param::Clusters => self.clusters = us(values),
        }
    }

    /// Cartesian product over the parameters `spec` uses, in a fixed order
    /// (parameter order of [`ModelSpec::parameters`], last varying fastest).
    /// For linear models, d values above `input_dim` are dropped.
    pub fn points(&self, spec: &ModelSpec, input_dim: usize) -> Result<Vec<HyperParams>> {
        let params = spec.parameters();
        let mut lists = Vec::with_capacity(params.len());
        for &p in &params {
            let mut vals = self.values(p, input_dim);
            if p == Param::D && !spec.is_kernelized() {
                vals.retain(|&d| d as usize <= input_dim);
            }
            validate(p, &vals)?;
            lists.push(vals);
        }
        let mut points = vec![HyperParams::default()];
        for (&p, vals) in params.iter().zip(&lists) {
            let mut next = Vec::with_capacity(points.len() * vals.len());
            for base in &points {
                for &v in vals {
                    let mut hp = *base;
                    hp.set(p, v);
                    next.push(hp);
                }
            }
            points = next;
        }
        // psi1 ignores beta; pin it to zero so reports stay honest
        if spec.kind == ModelKind::Ssvdd(SsvddVariant::Psi1) {
            for p in &mut points {
                p.beta = Some(0.0);
            }
        }
        Ok(points)
    }
}

fn validate(p: Param, vals: &[f64]) -> Result<()> {
    if vals.is_empty() {
        return Err(OccError::EmptyGrid);
    }
    let ok = |v: f64| match p {
        Param::C | Param::Sigma => v.is_finite() && v > 0.0,
        Param::Nu => v > 0.0 && v <= 1.0,
        Param::Beta | Param::Eta => v.is_finite() && v >= 0.0,
        Param::D | Param::K | Param::Clusters => v >= 1.0 && v.fract() == 0.0,
    };
    match vals.iter().find(|&&v| !ok(v)) {
        Some(bad) => Err(invalid(
            "grid",
            format!("{} = {bad} is outside its valid range", p.name()),
        )),
        None => Ok(()),
    }
}
