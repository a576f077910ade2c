//! PLA and ULA chains and ensembles.
//!
//! Each chain draws from its own counter-based stream `(seed, chain_index)`,
//! so an ensemble is a pure function of `(target, config, algorithm)` no matter
//! how chains are scheduled across workers.

use nalgebra::DVector;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prox::{prox_residual, prox_step, ProxConfig};
use crate::rng::{self, ChainRng};
use crate::targets::{find_stationary_point, Potential};

/// Every this many steps a PLA chain re-verifies the implicit equation.
const RESIDUAL_SPOT_CHECK_EVERY: usize = 100;
const STATIONARY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Pla,
    Ula,
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pla" => Ok(Algorithm::Pla),
            "ula" => Ok(Algorithm::Ula),
            other => Err(Error::InvalidParameter(format!("unknown algorithm '{other}'"))),
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Algorithm::Pla => "pla",
            Algorithm::Ula => "ula",
        })
    }
}

/// Law of the initial iterate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitSpec {
    /// Every chain starts at `x0`.
    PointMass { x0: Vec<f64> },
    /// `N(x*, (1/L) I)` around a stationary point `x*`.
    GaussianAtStationary,
    /// `x0` solves `x0 + ε∇f(x0) = x̃0` with `x̃0 ~ N(x*, 2ε I)`. Needs `ε < 1/L`.
    ProxPushforward,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    pub eps: f64,
    pub steps: usize,
    pub n_chains: usize,
    pub seed: u64,
    pub init: InitSpec,
    #[serde(default = "default_thinning")]
    pub thinning: usize,
    #[serde(default)]
    pub prox: ProxConfig,
}

fn default_thinning() -> usize {
    1
}

impl ChainConfig {
    pub fn new(eps: f64, steps: usize, n_chains: usize, seed: u64, init: InitSpec) -> Self {
        Self { eps, steps, n_chains, seed, init, thinning: 1, prox: ProxConfig::default() }
    }

    pub fn with_thinning(mut self, thinning: usize) -> Self {
        self.thinning = thinning;
        self
    }

    pub fn with_prox(mut self, prox: ProxConfig) -> Self {
        self.prox = prox;
        self
    }

    pub fn validate<P: Potential + ?Sized>(&self, p: &P, algorithm: Algorithm) -> Result<()> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::InvalidParameter(format!("step size {} must be positive and finite", self.eps)));
        }
        if self.n_chains == 0 {
            return Err(Error::InvalidParameter("need at least one chain".into()));
        }
        if self.thinning == 0 {
            return Err(Error::InvalidParameter("thinning must be at least 1".into()));
        }
        self.prox.validate()?;
        let l = p.smoothness();
        if algorithm == Algorithm::Pla && !p.is_convex() && self.eps * l > 1.0 {
            return Err(Error::Precondition(format!("PLA step {} exceeds 1/L for a nonconvex target", self.eps)));
        }
        match &self.init {
            InitSpec::PointMass { x0 } if x0.len() != p.dim() => {
                Err(Error::DimensionMismatch { expected: p.dim(), got: x0.len() })
            }
            InitSpec::ProxPushforward if self.eps * l >= 1.0 => Err(Error::Precondition(format!(
                "prox pushforward initialisation needs eps < 1/L = {}",
                1.0 / l
            ))),
            _ => Ok(()),
        }
    }

    /// Steps at which iterates are recorded: multiples of `thinning`, plus the last.
    pub fn stored_steps(&self) -> Vec<usize> {
        let thin = self.thinning.max(1);
        (0..=self.steps).filter(|s| s % thin == 0 || *s == self.steps).collect()
    }
}

/// One PLA step: `x' = prox_ε(x + √(2ε) z)`. Consumes exactly `n` normal draws.
pub fn pla_step<P: Potential + ?Sized, R: Rng + ?Sized>(
    p: &P,
    x: &DVector<f64>,
    eps: f64,
    rng: &mut R,
    prox_cfg: &ProxConfig,
) -> Result<DVector<f64>> {
    let y = noisy_input(x, eps, rng);
    Ok(prox_step(p, &y, eps, prox_cfg)?.x)
}

/// One ULA step: `x' = x − ε∇f(x) + √(2ε) z`. Consumes exactly `n` normal draws.
pub fn ula_step<P: Potential + ?Sized, R: Rng + ?Sized>(p: &P, x: &DVector<f64>, eps: f64, rng: &mut R) -> DVector<f64> {
    let mut y = noisy_input(x, eps, rng);
    y.axpy(-eps, &p.gradient(x), 1.0);
    y
}

fn noisy_input<R: Rng + ?Sized>(x: &DVector<f64>, eps: f64, rng: &mut R) -> DVector<f64> {
    let z = rng::standard_normal(rng, x.len());
    x + z * (2.0 * eps).sqrt()
}

/// How an ensemble is scheduled. Output is identical either way.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Serial,
    /// Uses rayon when the `parallel` feature is on, otherwise runs serially.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Serial
        }
    }
}

/// Recorded iterates of an ensemble, laid out chain-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub algorithm: Algorithm,
    pub config: ChainConfig,
    pub dim: usize,
    pub stored_steps: Vec<usize>,
    data: Vec<f64>,
}

impl Trace {
    pub fn n_chains(&self) -> usize {
        self.config.n_chains
    }

    /// Random stream used by `chain` (together with `config.seed`).
    pub fn stream_id(&self, chain: usize) -> u64 {
        chain as u64
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Iterate of `chain` at stored position `slot` (see `stored_steps`).
    pub fn iterate(&self, chain: usize, slot: usize) -> &[f64] {
        let per_chain = self.stored_steps.len() * self.dim;
        let start = chain * per_chain + slot * self.dim;
        &self.data[start..start + self.dim]
    }

    /// All chains at stored position `slot`.
    pub fn iterates_at(&self, slot: usize) -> Vec<DVector<f64>> {
        (0..self.n_chains()).map(|c| DVector::from_column_slice(self.iterate(c, slot))).collect()
    }

    pub fn final_iterates(&self) -> Vec<DVector<f64>> {
        self.iterates_at(self.stored_steps.len() - 1)
    }

    /// Slot holding step `step`, if it was stored.
    pub fn slot_of(&self, step: usize) -> Option<usize> {
        self.stored_steps.binary_search(&step).ok()
    }
}

fn initial_state<P: Potential + ?Sized>(
    p: &P,
    cfg: &ChainConfig,
    x_star: Option<&DVector<f64>>,
    rng: &mut ChainRng,
) -> Result<DVector<f64>> {
    let n = p.dim();
    match &cfg.init {
        InitSpec::PointMass { x0 } => Ok(DVector::from_column_slice(x0)),
        InitSpec::GaussianAtStationary => {
            let centre = x_star.expect("stationary point resolved before chains start");
            let z = rng::standard_normal(rng, n);
            Ok(centre + z / p.smoothness().sqrt())
        }
        InitSpec::ProxPushforward => {
            let centre = x_star.expect("stationary point resolved before chains start");
            let z = rng::standard_normal(rng, n);
            let tilde = centre + z * (2.0 * cfg.eps).sqrt();
            Ok(prox_step(p, &tilde, cfg.eps, &cfg.prox)?.x)
        }
    }
}

fn run_chain<P: Potential + ?Sized>(
    p: &P,
    cfg: &ChainConfig,
    algorithm: Algorithm,
    chain: usize,
    x_star: Option<&DVector<f64>>,
) -> Result<Vec<f64>> {
    let mut rng = rng::stream(cfg.seed, chain as u64);
    let thin = cfg.thinning.max(1);
    let mut out = Vec::with_capacity(cfg.stored_steps().len() * p.dim());
    let mut x = initial_state(p, cfg, x_star, &mut rng)?;
    out.extend(x.iter());
    for step in 1..=cfg.steps {
        x = match algorithm {
            Algorithm::Ula => ula_step(p, &x, cfg.eps, &mut rng),
            Algorithm::Pla => {
                let y = noisy_input(&x, cfg.eps, &mut rng);
                let next = prox_step(p, &y, cfg.eps, &cfg.prox)?.x;
                if step % RESIDUAL_SPOT_CHECK_EVERY == 0 {
                    let residual = prox_residual(p, &next, &y, cfg.eps);
                    if residual > cfg.prox.threshold(&y) {
                        return Err(Error::NonConvergence {
                            what: "implicit-equation spot check",
                            iterations: step,
                            residual,
                            best: next.iter().copied().collect(),
                        });
                    }
                }
                next
            }
        };
        if step % thin == 0 || step == cfg.steps {
            out.extend(x.iter());
        }
    }
    Ok(out)
}

/// Runs `cfg.n_chains` independent chains with the default execution mode.
pub fn run_ensemble<P: Potential + ?Sized>(p: &P, cfg: &ChainConfig, algorithm: Algorithm) -> Result<Trace> {
    run_ensemble_with(p, cfg, algorithm, Execution::default())
}

pub fn run_ensemble_with<P: Potential + ?Sized>(
    p: &P,
    cfg: &ChainConfig,
    algorithm: Algorithm,
    execution: Execution,
) -> Result<Trace> {
    cfg.validate(p, algorithm)?;
    let x_star = match cfg.init {
        InitSpec::PointMass { .. } => None,
        _ => Some(find_stationary_point(p, &DVector::zeros(p.dim()), STATIONARY_TOL)?),
    };
    let x_star = x_star.as_ref();
    let one = |chain: usize| {
        run_chain(p, cfg, algorithm, chain, x_star).map_err(|e| Error::Chain { chain, source: Box::new(e) })
    };
    let chains: Vec<Vec<f64>> = match execution {
        Execution::Serial => (0..cfg.n_chains).map(one).collect::<Result<_>>()?,
        Execution::Parallel => crate::exec::try_map(cfg.n_chains, one)?,
    };
    let data = chains.concat();
    Ok(Trace { algorithm, config: cfg.clone(), dim: p.dim(), stored_steps: cfg.stored_steps(), data })
}
