//! The implicit half of a proximal Langevin step.
//!
//! Given `y` and a step `ε`, find the minimiser of `f(x) + ‖x − y‖² / (2ε)`,
//! equivalently the root of `x + ε∇f(x) − y`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::targets::{GaussianTarget, Potential};

const CONDITION_LIMIT: f64 = 1e12;
const MAX_BACKTRACK: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProxSolver {
    #[default]
    Newton,
    GradientDescent,
}

impl std::str::FromStr for ProxSolver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "newton" => Ok(ProxSolver::Newton),
            "gradient_descent" | "gradient-descent" | "gd" => Ok(ProxSolver::GradientDescent),
            other => Err(Error::InvalidParameter(format!("unknown prox solver '{other}'"))),
        }
    }
}

impl std::fmt::Display for ProxSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ProxSolver::Newton => "newton",
            ProxSolver::GradientDescent => "gradient_descent",
        })
    }
}

/// Stopping rule for the inner solve.
///
/// With `relative` set the residual threshold is `tol · (1 + ‖y‖)`, otherwise
/// it is `tol`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProxConfig {
    pub tol: f64,
    pub relative: bool,
    pub max_iter: usize,
    pub solver: ProxSolver,
}

impl Default for ProxConfig {
    fn default() -> Self {
        Self { tol: 1e-10, relative: true, max_iter: 10_000, solver: ProxSolver::Newton }
    }
}

impl ProxConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidParameter(format!("prox tol {} must be positive", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("prox max_iter must be at least 1".into()));
        }
        Ok(())
    }

    /// Residual threshold for input `y`.
    pub fn threshold(&self, y: &DVector<f64>) -> f64 {
        if self.relative {
            self.tol * (1.0 + y.norm())
        } else {
            self.tol
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProxOutcome {
    pub x: DVector<f64>,
    /// `‖x + ε∇f(x) − y‖`.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Newton fell back to gradient descent on an ill-conditioned system.
    pub used_fallback: bool,
}

/// `x + ε∇f(x)`, the forward map whose inverse is the proximal step.
pub fn prox_forward<P: Potential + ?Sized>(p: &P, x: &DVector<f64>, eps: f64) -> DVector<f64> {
    x + p.gradient(x) * eps
}

/// `‖x + ε∇f(x) − y‖`.
pub fn prox_residual<P: Potential + ?Sized>(p: &P, x: &DVector<f64>, y: &DVector<f64>, eps: f64) -> f64 {
    (prox_forward(p, x, eps) - y).norm()
}

fn check_preconditions<P: Potential + ?Sized>(p: &P, y: &DVector<f64>, eps: f64, cfg: &ProxConfig) -> Result<()> {
    cfg.validate()?;
    if y.len() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), got: y.len() });
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!("step size {eps} must be positive and finite")));
    }
    let l = p.smoothness();
    if !p.is_convex() && eps * l > 1.0 {
        return Err(Error::Precondition(format!(
            "step {eps} exceeds 1/L = {} for a nonconvex target",
            1.0 / l
        )));
    }
    Ok(())
}

/// Runs the configured solver from `y` and reports the outcome whether or not
/// it converged.
pub fn prox_solve<P: Potential + ?Sized>(p: &P, y: &DVector<f64>, eps: f64, cfg: &ProxConfig) -> Result<ProxOutcome> {
    check_preconditions(p, y, eps, cfg)?;
    let threshold = cfg.threshold(y);
    match cfg.solver {
        ProxSolver::Newton => Ok(newton(p, y, eps, threshold, cfg.max_iter)),
        ProxSolver::GradientDescent => {
            let x = y.clone();
            let r = prox_forward(p, &x, eps) - y;
            Ok(gradient_descent(p, y, eps, threshold, cfg.max_iter, x, r, 0, false))
        }
    }
}

/// Solves the proximal subproblem, failing if the residual threshold is not met.
pub fn prox_step<P: Potential + ?Sized>(p: &P, y: &DVector<f64>, eps: f64, cfg: &ProxConfig) -> Result<ProxOutcome> {
    let out = prox_solve(p, y, eps, cfg)?;
    if !out.converged {
        return Err(Error::NonConvergence {
            what: "proximal solve",
            iterations: out.iterations,
            residual: out.residual,
            best: out.x.iter().copied().collect(),
        });
    }
    Ok(out)
}

fn newton<P: Potential + ?Sized>(p: &P, y: &DVector<f64>, eps: f64, threshold: f64, max_iter: usize) -> ProxOutcome {
    let n = y.len();
    let mut x = y.clone();
    let mut r = prox_forward(p, &x, eps) - y;
    let mut rn = r.norm();
    for it in 0..max_iter {
        if rn <= threshold {
            return ProxOutcome { x, residual: rn, iterations: it, converged: true, used_fallback: false };
        }
        let jac = DMatrix::<f64>::identity(n, n) + p.hessian(&x) * eps;
        let direction = match jac.cholesky() {
            Some(chol) => {
                let diag = chol.l_dirty().diagonal();
                let (lo, hi) = diag.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
                let cond = (hi / lo).powi(2);
                if cond.is_finite() && cond <= CONDITION_LIMIT {
                    Some(chol.solve(&r))
                } else {
                    None
                }
            }
            None => None,
        };
        let Some(d) = direction else {
            return gradient_descent(p, y, eps, threshold, max_iter, x, r, it, true);
        };

        // Damped step on the residual norm.
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACK {
            let xn = &x - &d * step;
            let rnew = prox_forward(p, &xn, eps) - y;
            let rnew_norm = rnew.norm();
            if rnew_norm < (1.0 - 1e-4 * step) * rn {
                accepted = Some((xn, rnew, rnew_norm));
                break;
            }
            step *= 0.5;
        }
        match accepted {
            Some((xn, rnew, rnew_norm)) => {
                x = xn;
                r = rnew;
                rn = rnew_norm;
            }
            None => return gradient_descent(p, y, eps, threshold, max_iter, x, r, it + 1, true),
        }
    }
    let converged = rn <= threshold;
    ProxOutcome { x, residual: rn, iterations: max_iter, converged, used_fallback: false }
}

/// Gradient descent on the subproblem objective with step `1/(1/ε + L)`,
/// i.e. `x ← x − r/(1 + εL)`.
#[allow(clippy::too_many_arguments)]
fn gradient_descent<P: Potential + ?Sized>(
    p: &P,
    y: &DVector<f64>,
    eps: f64,
    threshold: f64,
    max_iter: usize,
    mut x: DVector<f64>,
    mut r: DVector<f64>,
    start_iter: usize,
    used_fallback: bool,
) -> ProxOutcome {
    let shrink = 1.0 / (1.0 + eps * p.smoothness());
    let mut rn = r.norm();
    for it in start_iter..max_iter {
        if rn <= threshold {
            return ProxOutcome { x, residual: rn, iterations: it, converged: true, used_fallback };
        }
        x.axpy(-shrink, &r, 1.0);
        r = prox_forward(p, &x, eps) - y;
        rn = r.norm();
    }
    let converged = rn <= threshold;
    ProxOutcome { x, residual: rn, iterations: max_iter, converged, used_fallback }
}

/// Exact proximal map of a Gaussian target: `μ + Q (I + εΛ⁻¹)⁻¹ Qᵀ (y − μ)`.
pub fn gaussian_prox_closed_form(t: &GaussianTarget, y: &DVector<f64>, eps: f64) -> DVector<f64> {
    let mut c = t.to_eigen_coords(y);
    for (ci, &l) in c.iter_mut().zip(t.eigenvalues()) {
        *ci *= l / (l + eps);
    }
    t.from_eigen_coords(&c)
}
