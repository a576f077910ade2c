//! Experiment configuration files.
//!
//! ```json
//! {"schema_version": 1, "experiment": {"sample": { ... }}}
//! ```
//!
//! Every struct rejects unknown fields so a typo fails loudly instead of
//! silently running a default.

use std::path::{Path, PathBuf};

use proxlangevin::samplers::{Algorithm, ChainConfig};
use proxlangevin::sde_lab::Integrator;
use proxlangevin::{ProxSolver, TargetSpec};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub schema_version: u32,
    pub experiment: Experiment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Experiment {
    Sample(SampleConfig),
    BiasSweep(BiasSweepConfig),
    BoundCheck(BoundCheckConfig),
    SdeVerify(SdeVerifyConfig),
    ProxBench(ProxBenchConfig),
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Sample(_) => "sample",
            Experiment::BiasSweep(_) => "bias-sweep",
            Experiment::BoundCheck(_) => "bound-check",
            Experiment::SdeVerify(_) => "sde-verify",
            Experiment::ProxBench(_) => "prox-bench",
        }
    }
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: ConfigFile = serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn new(experiment: Experiment) -> Self {
        Self { schema_version: SCHEMA_VERSION, experiment }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    pub target: TargetSpec,
    pub algorithm: Algorithm,
    pub chain: ChainConfig,
    pub out: PathBuf,
    #[serde(default)]
    pub chart: bool,
}

/// Step sizes: an explicit list, or `lo:hi:logN` / `lo:hi:linN`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EpsGrid {
    List(Vec<f64>),
    Spec(String),
}

impl EpsGrid {
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        let v = match self {
            EpsGrid::List(v) => v.clone(),
            EpsGrid::Spec(s) => parse_grid(s)?,
        };
        if v.is_empty() || v.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return Err(CliError::Config(format!("step grid must be nonempty and positive: {v:?}")));
        }
        Ok(v)
    }
}

pub fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Config(format!("bad grid '{s}': use a,b,c or lo:hi:logN or lo:hi:linN"));
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [single] => single.split(',').map(|t| t.trim().parse::<f64>().map_err(|_| bad())).collect(),
        [lo, hi, kind] => {
            let lo: f64 = lo.parse().map_err(|_| bad())?;
            let hi: f64 = hi.parse().map_err(|_| bad())?;
            let (log, count) = if let Some(n) = kind.strip_prefix("log") {
                (true, n)
            } else if let Some(n) = kind.strip_prefix("lin") {
                (false, n)
            } else {
                return Err(bad());
            };
            let count: usize = count.parse().map_err(|_| bad())?;
            if count < 1 || !(lo > 0.0 && hi >= lo) {
                return Err(bad());
            }
            if count == 1 {
                return Ok(vec![lo]);
            }
            let step = |i: usize| i as f64 / (count - 1) as f64;
            Ok((0..count)
                .map(|i| {
                    if i == count - 1 {
                        hi
                    } else if log {
                        lo * (hi / lo).powf(step(i))
                    } else {
                        lo + (hi - lo) * step(i)
                    }
                })
                .collect())
        }
        _ => Err(bad()),
    }
}

/// Ensemble settings for the empirical columns of a bias sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmpiricalSpec {
    pub chains: usize,
    /// Defaults to `⌈10 max λ / ε⌉` per grid point.
    #[serde(default)]
    pub steps: Option<usize>,
    pub seed: u64,
    /// Batches for the standard error.
    #[serde(default = "default_groups")]
    pub groups: usize,
}

fn default_groups() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BiasSweepConfig {
    pub eigs: Vec<f64>,
    pub eps_grid: EpsGrid,
    /// Absent: theory columns only.
    #[serde(default)]
    pub empirical: Option<EmpiricalSpec>,
    pub out: PathBuf,
    #[serde(default)]
    pub chart: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundCheckConfig {
    pub alpha: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub n: usize,
    /// Accuracy target; when set, the step and horizon come from the budget rule.
    #[serde(default)]
    pub delta: Option<f64>,
    /// Used when `delta` is absent.
    #[serde(default)]
    pub eps_grid: Option<EpsGrid>,
    /// Horizon when `delta` is absent.
    #[serde(default = "default_horizon")]
    pub steps: usize,
    /// Isotropic variance of the Gaussian start; defaults to `4/α`.
    #[serde(default)]
    pub init_var: Option<f64>,
    /// Rows are written every `stride` iterations (and at the last one).
    #[serde(default = "default_stride")]
    pub stride: usize,
    pub out: PathBuf,
    #[serde(default)]
    pub chart: bool,
}

fn default_horizon() -> usize {
    500
}

fn default_stride() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SdeVerifyConfig {
    pub target: TargetSpec,
    pub t_end: f64,
    pub substeps: Vec<usize>,
    pub paths: usize,
    pub seed: u64,
    /// Starting point; defaults to all ones.
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    #[serde(default, with = "integrator_serde")]
    pub integrator: Integrator,
    pub out: PathBuf,
    #[serde(default)]
    pub chart: bool,
}

mod integrator_serde {
    use proxlangevin::sde_lab::Integrator;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(i: &Integrator, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&i.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Integrator, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProxBenchConfig {
    pub target: TargetSpec,
    pub eps: f64,
    pub points: usize,
    /// Inputs `y` are drawn uniformly from `[−radius, radius]^n`.
    pub radius: f64,
    pub seed: u64,
    #[serde(default = "all_solvers")]
    pub solvers: Vec<ProxSolver>,
    #[serde(default = "default_prox_tol")]
    pub tol: f64,
    #[serde(default = "default_prox_max_iter")]
    pub max_iter: usize,
    pub out: PathBuf,
}

fn all_solvers() -> Vec<ProxSolver> {
    vec![ProxSolver::Newton, ProxSolver::GradientDescent]
}

fn default_prox_tol() -> f64 {
    proxlangevin::ProxConfig::default().tol
}

fn default_prox_max_iter() -> usize {
    proxlangevin::ProxConfig::default().max_iter
}
