//! The continuous-time interpolation of one PLA step.
//!
//! For fixed `x₀` and a Brownian path `W`, the process defined implicitly by
//! `X_t + t∇f(X_t) = x₀ + √2 W_t` equals the PLA iterate at `t = ε`. Itô's
//! formula turns it into the SDE `dX = μ dt + √2 (I + t∇²f)⁻¹ dW` with
//!
//! ```text
//! G  = (I + t∇²f)⁻²
//! μ  = −(I + t∇²f)⁻¹ (∇f + t Tr(∇³f G))
//! μ̃ = μ − ∇·G + G∇f
//! ```
//!
//! This module evaluates those quantities, checks their envelopes, and compares
//! the implicit solution against an Euler–Maruyama integration of the SDE on a
//! shared Brownian path. The diffusion factor depends on `x` unless `f` is
//! quadratic, in which case Euler–Maruyama converges only at strong order ½; a
//! one-dimensional Milstein stepper is provided as the first-order alternative.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{spd_inverse, sym_eigenvalues, sym_op_norm};
use crate::prox::{prox_step, ProxConfig, ProxSolver};
use crate::rng;
use crate::targets::Potential;

/// Central-difference step for derivatives of `G`.
pub const FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DivergenceMode {
    /// Chain rule on `(I + t∇²f)⁻²` using the analytic third derivatives.
    #[default]
    Analytic,
    /// Central differences of `G` with step [`FD_STEP`].
    FiniteDifference,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationQuantities {
    pub t: f64,
    pub g: DMatrix<f64>,
    pub sqrt_g: DMatrix<f64>,
    pub mu: DVector<f64>,
    pub mu_tilde: DVector<f64>,
    /// `(∇·G)_i = Σ_k ∂_k G_{ik}`.
    pub div_g: DVector<f64>,
    /// `div_g` came from finite differences.
    pub approximate: bool,
}

fn require_third<P: Potential + ?Sized>(p: &P) -> Result<()> {
    if p.has_third_derivatives() {
        Ok(())
    } else {
        Err(Error::MissingCapability("third derivatives"))
    }
}

fn check_point<P: Potential + ?Sized>(p: &P, x: &DVector<f64>, t: f64) -> Result<()> {
    if x.len() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), got: x.len() });
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("time {t} must be nonnegative and finite")));
    }
    Ok(())
}

fn third_slices<P: Potential + ?Sized>(p: &P, x: &DVector<f64>) -> Result<Vec<DMatrix<f64>>> {
    (0..p.dim())
        .map(|i| p.third_directional(x, i).ok_or(Error::MissingCapability("third derivatives")))
        .collect()
}

/// `(I + t∇²f(x))⁻¹`.
fn inverse_b<P: Potential + ?Sized>(p: &P, x: &DVector<f64>, t: f64) -> Result<DMatrix<f64>> {
    let n = p.dim();
    let b = DMatrix::identity(n, n) + p.hessian(x) * t;
    spd_inverse(&b).map_err(|_| Error::Singular(format!("I + t∇²f is not positive definite at t = {t}")))
}

fn g_at<P: Potential + ?Sized>(p: &P, x: &DVector<f64>, t: f64) -> Result<DMatrix<f64>> {
    let s = inverse_b(p, x, t)?;
    Ok(&s * &s)
}

/// `∂_k G` by the chain rule: `−B⁻¹(t∂_k∇²f)B⁻² − B⁻²(t∂_k∇²f)B⁻¹`.
fn dg_analytic(sqrt_g: &DMatrix<f64>, g: &DMatrix<f64>, third: &[DMatrix<f64>], t: f64) -> Vec<DMatrix<f64>> {
    third
        .iter()
        .map(|tk| {
            let db = tk * t;
            -(sqrt_g * &db * g + g * &db * sqrt_g)
        })
        .collect()
}

fn dg_finite_difference<P: Potential + ?Sized>(p: &P, x: &DVector<f64>, t: f64) -> Result<Vec<DMatrix<f64>>> {
    (0..p.dim())
        .map(|k| {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[k] += FD_STEP;
            xm[k] -= FD_STEP;
            Ok((g_at(p, &xp, t)? - g_at(p, &xm, t)?) / (2.0 * FD_STEP))
        })
        .collect()
}

fn divergence_of(dg: &[DMatrix<f64>]) -> DVector<f64> {
    let n = dg.len();
    DVector::from_fn(n, |i, _| dg.iter().enumerate().map(|(k, m)| m[(i, k)]).sum())
}

/// `(μ, √G, G, third-derivative slices)`.
type DriftParts = (DVector<f64>, DMatrix<f64>, DMatrix<f64>, Vec<DMatrix<f64>>);

/// Drift and diffusion factor at `(x, t)`: `(μ, (I + t∇²f)⁻¹)`.
fn drift<P: Potential + ?Sized>(p: &P, x: &DVector<f64>, t: f64) -> Result<DriftParts> {
    let third = third_slices(p, x)?;
    let sqrt_g = inverse_b(p, x, t)?;
    let g = &sqrt_g * &sqrt_g;
    let trace = DVector::from_fn(p.dim(), |i, _| third[i].component_mul(&g).sum());
    let mu = -(&sqrt_g * (p.gradient(x) + trace * t));
    Ok((mu, sqrt_g, g, third))
}

pub fn interpolation_quantities<P: Potential + ?Sized>(
    p: &P,
    x: &DVector<f64>,
    t: f64,
    mode: DivergenceMode,
) -> Result<InterpolationQuantities> {
    check_point(p, x, t)?;
    require_third(p)?;
    let (mu, sqrt_g, g, third) = drift(p, x, t)?;
    let dg = match mode {
        DivergenceMode::Analytic => dg_analytic(&sqrt_g, &g, &third, t),
        DivergenceMode::FiniteDifference => dg_finite_difference(p, x, t)?,
    };
    let div_g = divergence_of(&dg);
    let mu_tilde = &mu - &div_g + &g * p.gradient(x);
    Ok(InterpolationQuantities {
        t,
        g,
        sqrt_g,
        mu,
        mu_tilde,
        div_g,
        approximate: mode == DivergenceMode::FiniteDifference,
    })
}

/// Largest interpolation time covered by the envelope bounds, `min{1/(8L), 1/M}`.
pub fn admissible_time<P: Potential + ?Sized>(p: &P) -> Result<f64> {
    let m = p.hessian_lipschitz().ok_or(Error::MissingCapability("Hessian Lipschitz constant"))?;
    let inv_m = if m > 0.0 { 1.0 / m } else { f64::INFINITY };
    Ok((1.0 / (8.0 * p.smoothness())).min(inv_m))
}

/// Slack of each envelope inequality at one `(x, t)`; nonnegative slack means
/// the inequality holds.
#[derive(Debug, Clone, PartialEq)]
pub struct Lemma4Report {
    pub eig_min: f64,
    pub eig_max: f64,
    /// `eig_min − 3/4`.
    pub eig_lower_slack: f64,
    /// `4/3 − eig_max`.
    pub eig_upper_slack: f64,
    pub mu_tilde_norm: f64,
    /// `(4/3) t L ‖∇f‖ + 6 t n^{3/2} M`.
    pub mu_tilde_bound: f64,
    pub mu_tilde_slack: f64,
    /// `max_k ‖∂_k G‖_op`, by central differences.
    pub dg_norm: f64,
    /// `4 t M`.
    pub dg_bound: f64,
    pub dg_slack: f64,
}

impl Lemma4Report {
    pub fn holds(&self) -> bool {
        self.eig_lower_slack > 0.0 && self.eig_upper_slack > 0.0 && self.mu_tilde_slack >= 0.0 && self.dg_slack >= 0.0
    }
}

pub fn check_lemma4<P: Potential + ?Sized>(p: &P, x: &DVector<f64>, t: f64) -> Result<Lemma4Report> {
    check_point(p, x, t)?;
    let t_max = admissible_time(p)?;
    if t > t_max {
        return Err(Error::Precondition(format!("t = {t} exceeds min(1/(8L), 1/M) = {t_max}")));
    }
    let iq = interpolation_quantities(p, x, t, DivergenceMode::Analytic)?;
    let eig = sym_eigenvalues(&iq.g);
    let (eig_min, eig_max) = (eig[0], eig[eig.len() - 1]);
    let n = p.dim() as f64;
    let l = p.smoothness();
    let m = p.hessian_lipschitz().unwrap_or(0.0);
    let mu_tilde_norm = iq.mu_tilde.norm();
    let mu_tilde_bound = 4.0 / 3.0 * t * l * p.gradient(x).norm() + 6.0 * t * n.powf(1.5) * m;
    let dg_norm = dg_finite_difference(p, x, t)?.iter().map(sym_op_norm).fold(0.0, f64::max);
    let dg_bound = 4.0 * t * m;
    Ok(Lemma4Report {
        eig_min,
        eig_max,
        eig_lower_slack: eig_min - 0.75,
        eig_upper_slack: 4.0 / 3.0 - eig_max,
        mu_tilde_norm,
        mu_tilde_bound,
        mu_tilde_slack: mu_tilde_bound - mu_tilde_norm,
        dg_norm,
        dg_bound,
        dg_slack: dg_bound - dg_norm,
    })
}

/// Brownian increments on a uniform grid of `[0, t_end]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BrownianPath {
    pub t_end: f64,
    pub increments: Vec<DVector<f64>>,
}

impl BrownianPath {
    /// Path number `stream` under `seed`, resolved on `steps` intervals.
    pub fn sample(dim: usize, t_end: f64, steps: usize, seed: u64, stream: u64) -> Self {
        let mut rng = rng::stream(seed, stream);
        let sd = (t_end / steps as f64).sqrt();
        let increments = (0..steps).map(|_| rng::standard_normal(&mut rng, dim) * sd).collect();
        Self { t_end, increments }
    }

    pub fn zero(dim: usize, t_end: f64, steps: usize) -> Self {
        Self { t_end, increments: vec![DVector::zeros(dim); steps] }
    }

    pub fn steps(&self) -> usize {
        self.increments.len()
    }

    /// Increments aggregated onto a grid of `coarse` intervals, which must divide
    /// the native resolution.
    pub fn coarsen(&self, coarse: usize) -> Result<Vec<DVector<f64>>> {
        if coarse == 0 || !self.steps().is_multiple_of(coarse) {
            return Err(Error::InvalidParameter(format!(
                "{coarse} substeps do not divide the path resolution {}",
                self.steps()
            )));
        }
        let block = self.steps() / coarse;
        Ok(self
            .increments
            .chunks(block)
            .map(|c| c.iter().fold(DVector::zeros(c[0].len()), |acc, d| acc + d))
            .collect())
    }
}

/// Pathwise discrepancy between the implicit solution and Euler–Maruyama, one
/// entry per substep count.
#[derive(Debug, Clone, PartialEq)]
pub struct SdeCheck {
    pub substeps: Vec<usize>,
    pub errors: Vec<f64>,
}

impl SdeCheck {
    /// `errors[i] / errors[i + 1]`.
    pub fn ratios(&self) -> Vec<f64> {
        self.errors.windows(2).map(|w| w[0] / w[1]).collect()
    }

    pub fn monotone(&self) -> bool {
        self.errors.windows(2).all(|w| w[1] < w[0])
    }
}

fn exact_prox_config() -> ProxConfig {
    ProxConfig { tol: 1e-14, relative: true, max_iter: 200, solver: ProxSolver::Newton }
}

fn check_sde_inputs<P: Potential + ?Sized>(p: &P, x0: &DVector<f64>, t_end: f64, substeps: &[usize]) -> Result<()> {
    check_point(p, x0, t_end)?;
    require_third(p)?;
    let t_max = admissible_time(p)?;
    if t_end > t_max {
        return Err(Error::Precondition(format!("t_end = {t_end} exceeds min(1/(8L), 1/M) = {t_max}")));
    }
    if substeps.is_empty() || substeps.contains(&0) {
        return Err(Error::InvalidParameter("substep counts must be positive".into()));
    }
    Ok(())
}

/// Time stepper for the SDE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Integrator {
    /// The reference scheme. Strong order 1 when the diffusion factor does not
    /// depend on `x` (quadratic `f`), order ½ otherwise.
    #[default]
    EulerMaruyama,
    /// Euler–Maruyama plus the `½ σ ∂ₓσ (ΔW² − Δt)` correction; strong order 1
    /// for any smooth `f`. One-dimensional targets only.
    Milstein,
}

impl std::str::FromStr for Integrator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euler_maruyama" | "euler-maruyama" | "em" => Ok(Integrator::EulerMaruyama),
            "milstein" => Ok(Integrator::Milstein),
            other => Err(Error::InvalidParameter(format!("unknown integrator '{other}'"))),
        }
    }
}

impl std::fmt::Display for Integrator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Integrator::EulerMaruyama => "euler_maruyama",
            Integrator::Milstein => "milstein",
        })
    }
}

/// Compares the two representations along `path` for each substep count,
/// recording `max_t ‖X_t^implicit − X_t^integrated‖` on each grid.
pub fn verify_sde_on_path<P: Potential + ?Sized>(
    p: &P,
    x0: &DVector<f64>,
    path: &BrownianPath,
    substeps: &[usize],
    integrator: Integrator,
) -> Result<SdeCheck> {
    check_sde_inputs(p, x0, path.t_end, substeps)?;
    if integrator == Integrator::Milstein && p.dim() != 1 {
        return Err(Error::InvalidParameter("the Milstein stepper supports one-dimensional targets only".into()));
    }
    if path.t_end == 0.0 {
        return Ok(SdeCheck { substeps: substeps.to_vec(), errors: vec![0.0; substeps.len()] });
    }
    let sqrt2 = std::f64::consts::SQRT_2;
    let cfg = exact_prox_config();
    let mut errors = Vec::with_capacity(substeps.len());
    for &n_sub in substeps {
        let dw = path.coarsen(n_sub)?;
        let dt = path.t_end / n_sub as f64;
        let mut w = DVector::zeros(p.dim());
        let mut x = x0.clone();
        let mut worst: f64 = 0.0;
        for (j, inc) in dw.iter().enumerate() {
            let t = j as f64 * dt;
            let (mu, sqrt_g, _, third) = drift(p, &x, t)?;
            let mut next = &x + mu * dt + (&sqrt_g * inc) * sqrt2;
            if integrator == Integrator::Milstein {
                // σ = √2 / (1 + t f''), so ∂ₓσ = −√2 t f''' / (1 + t f'')^2.
                let s = sqrt_g[(0, 0)];
                let sigma = sqrt2 * s;
                let d_sigma = -sqrt2 * t * third[0][(0, 0)] * s * s;
                next[0] += 0.5 * sigma * d_sigma * (inc[0] * inc[0] - dt);
            }
            x = next;
            w += inc;
            let t_next = (j + 1) as f64 * dt;
            let y = x0 + &w * sqrt2;
            let exact = prox_step(p, &y, t_next, &cfg)?.x;
            worst = worst.max((exact - &x).norm());
        }
        errors.push(worst);
    }
    Ok(SdeCheck { substeps: substeps.to_vec(), errors })
}

fn finest_grid(substeps: &[usize]) -> usize {
    substeps.iter().copied().max().unwrap_or(1)
}

/// One Brownian path (stream 0 of `seed`) at the finest requested resolution.
pub fn verify_sde_representation<P: Potential + ?Sized>(
    p: &P,
    x0: &DVector<f64>,
    t_end: f64,
    substeps: &[usize],
    seed: u64,
) -> Result<SdeCheck> {
    check_sde_inputs(p, x0, t_end, substeps)?;
    let path = BrownianPath::sample(p.dim(), t_end, finest_grid(substeps), seed, 0);
    verify_sde_on_path(p, x0, &path, substeps, Integrator::EulerMaruyama)
}

/// `n_paths` independent paths (streams `0..n_paths`), checked concurrently.
pub fn verify_sde_paths<P: Potential + ?Sized>(
    p: &P,
    x0: &DVector<f64>,
    t_end: f64,
    substeps: &[usize],
    n_paths: usize,
    seed: u64,
    integrator: Integrator,
) -> Result<Vec<SdeCheck>> {
    check_sde_inputs(p, x0, t_end, substeps)?;
    let fine = finest_grid(substeps);
    crate::exec::try_map(n_paths, |i| {
        let path = BrownianPath::sample(p.dim(), t_end, fine, seed, i as u64);
        verify_sde_on_path(p, x0, &path, substeps, integrator)
    })
}
