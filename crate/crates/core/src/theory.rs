//! Closed-form limits, biases and bound calculators.
//!
//! Gaussian quantities are spectral: covariances are passed as eigenvalue
//! lists in a basis shared by both distributions.
//!
//! Two KL conventions appear here and they are not interchangeable:
//!
//! * [`kl_bias_pla`] / [`kl_bias_ula`] evaluate the classical closed forms
//!   `½ Σ (±u − log(1 ± u))` with `u = ε/(2λ)`. Worked out from the Gaussian
//!   densities, these equal `KL(ν ‖ ν_ε)`: the target measured against the
//!   biased limit.
//! * [`gaussian_kl`] is `KL(ρ ‖ ν) = ∫ ρ log(ρ/ν)`. Applied to the biased limit
//!   it gives the relative entropy of the chain's limit law with respect to
//!   the target, which is what an ensemble estimates and what the Rényi
//!   closed forms reduce to as `q → 1`.
//!
//! Both agree to leading order `ε²/(16λ²)` and differ at order `ε³`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::samplers::Algorithm;

/// A divergence value that may be `+∞` (for instance a ULA bias past the
/// stability threshold).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Divergence {
    Finite(f64),
    Infinite,
}

impl Divergence {
    pub fn value(self) -> f64 {
        match self {
            Divergence::Finite(v) => v,
            Divergence::Infinite => f64::INFINITY,
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Divergence::Finite(v) => Some(v),
            Divergence::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Divergence::Finite(_))
    }
}

impl std::fmt::Display for Divergence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Divergence::Finite(v) => write!(f, "{v}"),
            Divergence::Infinite => f.write_str("inf"),
        }
    }
}

/// `v − log(1 + v)` without cancellation for small `|v|`.
pub(crate) fn v_minus_log1p(v: f64) -> f64 {
    if v.abs() < 1e-2 {
        // v²/2 − v³/3 + v⁴/4 − …
        let mut term = v;
        let mut acc = 0.0;
        for k in 2..=14 {
            term *= -v;
            acc += term / k as f64;
        }
        -acc
    } else {
        v - v.ln_1p()
    }
}

fn check_eigs(eigs: &[f64]) -> Result<()> {
    if eigs.is_empty() {
        return Err(Error::InvalidParameter("empty eigenvalue list".into()));
    }
    if let Some(bad) = eigs.iter().find(|&&l| !(l > 0.0 && l.is_finite())) {
        return Err(Error::InvalidParameter(format!("eigenvalue {bad} must be positive and finite")));
    }
    Ok(())
}

fn check_step(eps: f64) -> Result<()> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!("step size {eps} must be nonnegative and finite")));
    }
    Ok(())
}

fn min_eig(eigs: &[f64]) -> f64 {
    eigs.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Stationary covariance spectrum of PLA on `N(0, Σ)`: `λ / (1 + ε/(2λ))`.
pub fn pla_limit_gaussian(eigs: &[f64], eps: f64) -> Result<Vec<f64>> {
    check_eigs(eigs)?;
    check_step(eps)?;
    Ok(eigs.iter().map(|&l| l / (1.0 + eps / (2.0 * l))).collect())
}

/// Stationary covariance spectrum of ULA: `λ / (1 − ε/(2λ))`, defined only for
/// `ε < 2 min λ`.
pub fn ula_limit_gaussian(eigs: &[f64], eps: f64) -> Result<Vec<f64>> {
    check_eigs(eigs)?;
    check_step(eps)?;
    let threshold = 2.0 * min_eig(eigs);
    if eps >= threshold {
        return Err(Error::NoStationaryLaw(format!("ULA diverges for eps {eps} >= 2 min λ = {threshold}")));
    }
    Ok(eigs.iter().map(|&l| l / (1.0 - eps / (2.0 * l))).collect())
}

/// Stationary spectrum for either algorithm.
pub fn limit_gaussian(algorithm: Algorithm, eigs: &[f64], eps: f64) -> Result<Vec<f64>> {
    match algorithm {
        Algorithm::Pla => pla_limit_gaussian(eigs, eps),
        Algorithm::Ula => ula_limit_gaussian(eigs, eps),
    }
}

/// Closed-form PLA bias `½ Σ (ε/(2λ) − log(1 + ε/(2λ)))`.
pub fn kl_bias_pla(eigs: &[f64], eps: f64) -> Result<f64> {
    check_eigs(eigs)?;
    check_step(eps)?;
    Ok(0.5 * eigs.iter().map(|&l| v_minus_log1p(eps / (2.0 * l))).sum::<f64>())
}

/// Closed-form ULA bias `½ Σ (−ε/(2λ) − log(1 − ε/(2λ)))`, infinite once
/// `ε ≥ 2 min λ`.
pub fn kl_bias_ula(eigs: &[f64], eps: f64) -> Result<Divergence> {
    check_eigs(eigs)?;
    check_step(eps)?;
    if eps >= 2.0 * min_eig(eigs) {
        return Ok(Divergence::Infinite);
    }
    Ok(Divergence::Finite(0.5 * eigs.iter().map(|&l| v_minus_log1p(-eps / (2.0 * l))).sum::<f64>()))
}

/// `KL(ν_ε ‖ ν)` for the stationary law of `algorithm`, i.e. [`gaussian_kl`]
/// applied to the limit spectrum.
pub fn limit_relative_entropy(algorithm: Algorithm, eigs: &[f64], eps: f64) -> Result<Divergence> {
    match limit_gaussian(algorithm, eigs, eps) {
        Ok(limit) => Ok(Divergence::Finite(gaussian_kl(&limit, eigs)?)),
        Err(Error::NoStationaryLaw(_)) => Ok(Divergence::Infinite),
        Err(e) => Err(e),
    }
}

/// Leading-order coefficients fitted to the closed-form biases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionFit {
    pub c2: f64,
    pub c3: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionReport {
    pub pla: ExpansionFit,
    pub ula: ExpansionFit,
    /// `(1/16) Σ 1/λ²`.
    pub expected_c2: f64,
    /// `(1/48) Σ 1/λ³`; PLA carries it with a minus sign, ULA with a plus.
    pub expected_c3: f64,
    /// `(bias_ula − bias_pla)/ε³` at the smallest grid step; tends to `(1/24) Σ 1/λ³`.
    pub cubic_gap: f64,
}

impl ExpansionReport {
    /// Largest relative deviation of the fitted coefficients from the expansion.
    pub fn max_relative_error(&self) -> f64 {
        let rel = |got: f64, want: f64| ((got - want) / want).abs();
        [
            rel(self.pla.c2, self.expected_c2),
            rel(self.ula.c2, self.expected_c2),
            rel(self.pla.c3, -self.expected_c3),
            rel(self.ula.c3, self.expected_c3),
            rel(self.cubic_gap, 2.0 * self.expected_c3),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn passes(&self, rel_tol: f64) -> bool {
        self.max_relative_error() <= rel_tol
    }
}

/// Fits `c₂ε² + c₃ε³` (plus an `ε⁴` nuisance term) to both closed-form biases
/// over `eps_grid ⊂ (0, 0.1 min λ]`.
pub fn kl_bias_expansion_check(eigs: &[f64], eps_grid: &[f64]) -> Result<ExpansionReport> {
    check_eigs(eigs)?;
    let cap = 0.1 * min_eig(eigs);
    if let Some(bad) = eps_grid.iter().find(|&&e| !(e > 0.0 && e <= cap * (1.0 + 1e-12))) {
        return Err(Error::InvalidParameter(format!("grid step {bad} outside (0, {cap}]")));
    }
    let mut distinct: Vec<f64> = eps_grid.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::FitFailure("expansion fit needs at least 3 distinct step sizes".into()));
    }
    let pla: Vec<f64> = eps_grid.iter().map(|&e| kl_bias_pla(eigs, e)).collect::<Result<_>>()?;
    let ula: Vec<f64> = eps_grid
        .iter()
        .map(|&e| kl_bias_ula(eigs, e).map(Divergence::value))
        .collect::<Result<_>>()?;
    let e_min = distinct[0];
    let cubic_gap = (kl_bias_ula(eigs, e_min)?.value() - kl_bias_pla(eigs, e_min)?) / e_min.powi(3);
    Ok(ExpansionReport {
        pla: fit_cubic_expansion(eps_grid, &pla)?,
        ula: fit_cubic_expansion(eps_grid, &ula)?,
        expected_c2: eigs.iter().map(|l| 1.0 / (16.0 * l * l)).sum(),
        expected_c3: eigs.iter().map(|l| 1.0 / (48.0 * l * l * l)).sum(),
        cubic_gap,
    })
}

fn fit_cubic_expansion(eps: &[f64], bias: &[f64]) -> Result<ExpansionFit> {
    // bias/ε² = c₂ + c₃ε + c₄ε², with ε rescaled to [0, 1] for conditioning.
    let scale = eps.iter().copied().fold(0.0, f64::max);
    let m = eps.len();
    let a = DMatrix::from_fn(m, 3, |i, j| (eps[i] / scale).powi(j as i32));
    let b = DVector::from_fn(m, |i, _| bias[i] / (eps[i] * eps[i]));
    let coef = a
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::FitFailure(e.to_string()))?;
    Ok(ExpansionFit { c2: coef[0], c3: coef[1] / scale })
}

/// Parameters of the KL convergence bound under `α`-LSI and `(L, M)`-smoothness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundParams {
    pub alpha: f64,
    pub l: f64,
    pub m: f64,
    pub n: usize,
    pub eps: f64,
    pub k: usize,
    /// Initial relative entropy `H_ν(ρ₀)`.
    pub h0: f64,
}

/// Largest admissible step `min{1/(8L), 1/M, 3α/(32L²)}`.
pub fn thm1_step_ceiling(alpha: f64, l: f64, m: f64) -> f64 {
    let inv_m = if m > 0.0 { 1.0 / m } else { f64::INFINITY };
    (1.0 / (8.0 * l)).min(inv_m).min(3.0 * alpha / (32.0 * l * l))
}

fn smoothness_term(n: usize, l: f64, m: f64) -> f64 {
    let n = n as f64;
    n * (l.powi(3) + 9.0 * n * n * m * m)
}

impl BoundParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("L", self.l), ("eps", self.eps)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} = {v} must be positive")));
            }
        }
        if !(self.m >= 0.0 && self.m.is_finite()) {
            return Err(Error::InvalidParameter(format!("M = {} must be nonnegative", self.m)));
        }
        if self.n == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if !(self.h0 >= 0.0) {
            return Err(Error::InvalidParameter(format!("initial KL {} must be nonnegative", self.h0)));
        }
        let ceiling = thm1_step_ceiling(self.alpha, self.l, self.m);
        if self.eps > ceiling {
            return Err(Error::Precondition(format!("eps {} exceeds the admissible ceiling {ceiling}", self.eps)));
        }
        Ok(())
    }

    /// Stationary part of the bound, `34 ε² n (L³ + 9n²M²)/α`.
    pub fn bias_term(&self) -> f64 {
        34.0 * self.eps * self.eps * smoothness_term(self.n, self.l, self.m) / self.alpha
    }
}

/// `e^{−αεk} H₀ + 34 ε² n (L³ + 9n²M²)/α`.
pub fn kl_bound_thm1(bp: &BoundParams) -> Result<f64> {
    bp.validate()?;
    Ok((-bp.alpha * bp.eps * bp.k as f64).exp() * bp.h0 + bp.bias_term())
}

/// One-step recurrence bound `e^{−αε} H + 32 ε³ n (L³ + 9n²M²)`.
pub fn one_step_bound(h: f64, alpha: f64, l: f64, m: f64, n: usize, eps: f64) -> f64 {
    (-alpha * eps).exp() * h + 32.0 * eps.powi(3) * smoothness_term(n, l, m)
}

/// Step size and iteration count that certify `H_ν(ρ_k) ≤ δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Budget {
    pub eps: f64,
    pub k: usize,
    /// The step was clipped to the admissible ceiling.
    pub capped: bool,
}

/// Chooses `ε = √(αδ / (68 n (L³ + 9n²M²)))` and `k = ⌈log(2H₀/δ)/(αε)⌉`, so
/// each term of the bound is at most `δ/2`.
pub fn budget_cor2(alpha: f64, l: f64, m: f64, n: usize, delta: f64, h0: f64) -> Result<Budget> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParameter(format!("delta {delta} must be positive")));
    }
    let raw = (alpha * delta / (68.0 * smoothness_term(n, l, m))).sqrt();
    let ceiling = thm1_step_ceiling(alpha, l, m);
    let (eps, capped) = if raw > ceiling { (ceiling, true) } else { (raw, false) };
    let k = if h0 <= delta / 2.0 {
        0
    } else {
        ((2.0 * h0 / delta).ln() / (alpha * eps)).ceil() as usize
    };
    let budget = Budget { eps, k, capped };
    let bound = kl_bound_thm1(&BoundParams { alpha, l, m, n, eps, k, h0 })?;
    debug_assert!(bound <= delta * (1.0 + 1e-12), "budget bound {bound} > {delta}");
    Ok(budget)
}

/// Parameters of the Rényi bounds, where `ν_ε` satisfies LSI or Poincaré with
/// constant `β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenyiBoundParams {
    pub beta: f64,
    pub q: f64,
    pub eps: f64,
    pub k: usize,
    /// Smoothness of `ν`, for the step-size hypothesis.
    pub l: f64,
    /// `R_{2q, ν_ε}(ρ₀)`.
    pub r0: f64,
    /// Asymptotic bias term.
    pub bias: f64,
}

impl RenyiBoundParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.l > 0.0 && self.eps > 0.0) {
            return Err(Error::InvalidParameter("beta, L and eps must be positive".into()));
        }
        if !(self.q > 1.0) {
            return Err(Error::InvalidParameter(format!("order q = {} must exceed 1", self.q)));
        }
        if !(self.r0 >= 0.0 && self.bias >= 0.0) {
            return Err(Error::InvalidParameter("initial divergence and bias must be nonnegative".into()));
        }
        let ceiling = (1.0 / self.l).min(1.0 / (2.0 * self.beta));
        if self.eps >= ceiling {
            return Err(Error::Precondition(format!("eps {} must be below min(1/L, 1/(2β)) = {ceiling}", self.eps)));
        }
        Ok(())
    }

    fn prefactor(&self) -> f64 {
        (self.q - 0.5) / (self.q - 1.0)
    }
}

/// Rényi bound when `ν_ε` satisfies LSI:
/// `((q − ½)/(q − 1)) R₀ e^{−βεk/(2q)} + bias`.
pub fn renyi_bound_lsi(rp: &RenyiBoundParams) -> Result<f64> {
    rp.validate()?;
    let decay = (-rp.beta * rp.eps * rp.k as f64 / (2.0 * rp.q)).exp();
    Ok(rp.prefactor() * rp.r0 * decay + rp.bias)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PoincareBound {
    /// `k < k₀`: only the linear decrease `R₀ − βεk/(2q)` of the order-`2q`
    /// divergence is certified.
    PreBurnIn { k0: f64, linear: f64 },
    /// `k ≥ k₀`: `((q − ½)/(q − 1)) e^{−βε(k − k₀)/(2q)} + bias`.
    Tail { k0: f64, value: f64 },
}

impl PoincareBound {
    pub fn k0(&self) -> f64 {
        match *self {
            PoincareBound::PreBurnIn { k0, .. } | PoincareBound::Tail { k0, .. } => k0,
        }
    }
}

/// Rényi bound when `ν_ε` satisfies a Poincaré inequality. The burn-in length is
/// `k₀ = (2q/(βε))(R₀ − 1)`, clamped at zero when `R₀ ≤ 1`.
pub fn renyi_bound_poincare(rp: &RenyiBoundParams) -> Result<PoincareBound> {
    rp.validate()?;
    let rate = rp.beta * rp.eps / (2.0 * rp.q);
    let k0 = ((rp.r0 - 1.0) / rate).max(0.0);
    let k = rp.k as f64;
    if k < k0 {
        Ok(PoincareBound::PreBurnIn { k0, linear: rp.r0 - rate * k })
    } else {
        Ok(PoincareBound::Tail { k0, value: rp.prefactor() * (-rate * (k - k0)).exp() + rp.bias })
    }
}

/// `KL(N(0, ρ) ‖ N(0, ν))` for covariances diagonal in a shared basis.
pub fn gaussian_kl(eigs_rho: &[f64], eigs_nu: &[f64]) -> Result<f64> {
    gaussian_kl_shifted(&vec![0.0; eigs_rho.len()], eigs_rho, eigs_nu)
}

/// As [`gaussian_kl`], with mean offset `mean_rho − mean_nu` given in the shared basis.
pub fn gaussian_kl_shifted(mean_gap: &[f64], eigs_rho: &[f64], eigs_nu: &[f64]) -> Result<f64> {
    check_pair(eigs_rho, eigs_nu)?;
    if mean_gap.len() != eigs_nu.len() {
        return Err(Error::DimensionMismatch { expected: eigs_nu.len(), got: mean_gap.len() });
    }
    let cov: f64 = eigs_rho.iter().zip(eigs_nu).map(|(r, v)| v_minus_log1p(r / v - 1.0)).sum();
    let shift: f64 = mean_gap.iter().zip(eigs_nu).map(|(d, v)| d * d / v).sum();
    Ok(0.5 * (cov + shift))
}

fn check_pair(a: &[f64], b: &[f64]) -> Result<()> {
    check_eigs(a)?;
    check_eigs(b)?;
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: b.len(), got: a.len() });
    }
    Ok(())
}

const RENYI_KL_BRANCH: f64 = 1e-6;

/// Rényi divergence `R_q(N(0, ρ) ‖ N(0, ν))` of order `q > 0`, for covariances
/// diagonal in a shared basis. Infinite when `q ν_i + (1 − q) ρ_i ≤ 0` for some
/// `i`. Orders within `1e-6` of one use the KL limit.
pub fn gaussian_renyi(q: f64, eigs_rho: &[f64], eigs_nu: &[f64]) -> Result<Divergence> {
    check_pair(eigs_rho, eigs_nu)?;
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::InvalidParameter(format!("order {q} must be positive")));
    }
    if (q - 1.0).abs() < RENYI_KL_BRANCH {
        return Ok(Divergence::Finite(gaussian_kl(eigs_rho, eigs_nu)?));
    }
    let mut total = 0.0;
    for (&r, &v) in eigs_rho.iter().zip(eigs_nu) {
        let ratio = r / v;
        let mix = q + (1.0 - q) * ratio;
        if mix <= 0.0 {
            return Ok(Divergence::Infinite);
        }
        total += -0.5 * ratio.ln() - mix.ln() / (2.0 * (q - 1.0));
    }
    Ok(Divergence::Finite(total))
}

/// 2-Wasserstein distance between Gaussians diagonal in a shared basis; means
/// are given in that basis.
pub fn gaussian_w2(mean_rho: &[f64], eigs_rho: &[f64], mean_nu: &[f64], eigs_nu: &[f64]) -> Result<f64> {
    check_pair(eigs_rho, eigs_nu)?;
    if mean_rho.len() != eigs_rho.len() || mean_nu.len() != eigs_nu.len() {
        return Err(Error::DimensionMismatch { expected: eigs_nu.len(), got: mean_rho.len() });
    }
    let shift: f64 = mean_rho.iter().zip(mean_nu).map(|(a, b)| (a - b).powi(2)).sum();
    let spread: f64 = eigs_rho.iter().zip(eigs_nu).map(|(a, b)| (a.sqrt() - b.sqrt()).powi(2)).sum();
    Ok((shift + spread).sqrt())
}

fn check_renyi_inputs(n: usize, alpha: f64, eps: f64, q: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!("alpha {alpha} must be positive")));
    }
    check_step(eps)?;
    if !(q > 1.0 && q.is_finite()) {
        return Err(Error::InvalidParameter(format!("order {q} must exceed 1")));
    }
    Ok(())
}

/// `R_q(ν_ε^PLA ‖ ν)` for `ν = N(0, I/α)` in dimension `n`:
/// `(n/(2(q−1))) (q log(1 + εα/2) − log(1 + qεα/2))`.
pub fn renyi_bias_pla(n: usize, alpha: f64, eps: f64, q: f64) -> Result<f64> {
    check_renyi_inputs(n, alpha, eps, q)?;
    let u = eps * alpha / 2.0;
    if (q - 1.0).abs() < RENYI_KL_BRANCH {
        return Ok(n as f64 * 0.5 * v_minus_log1p(-u / (1.0 + u)));
    }
    Ok(n as f64 / (2.0 * (q - 1.0)) * (q * u.ln_1p() - (q * u).ln_1p()))
}

/// ULA analogue of [`renyi_bias_pla`]; infinite for `q ≥ 2/(εα)`.
pub fn renyi_bias_ula(n: usize, alpha: f64, eps: f64, q: f64) -> Result<Divergence> {
    check_renyi_inputs(n, alpha, eps, q)?;
    let u = eps * alpha / 2.0;
    if q * u >= 1.0 {
        return Ok(Divergence::Infinite);
    }
    if (q - 1.0).abs() < RENYI_KL_BRANCH {
        return Ok(Divergence::Finite(n as f64 * 0.5 * v_minus_log1p(u / (1.0 - u))));
    }
    Ok(Divergence::Finite(n as f64 / (2.0 * (q - 1.0)) * (q * (-u).ln_1p() - (-q * u).ln_1p())))
}

/// Largest step whose order-`(2q − 1)` PLA bias stays within `delta`, for the
/// isotropic Gaussian `N(0, I/α)`. Found by bisection; the bias is increasing in `ε`.
pub fn renyi_step_size_for_bias(n: usize, alpha: f64, q: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta {delta} must be positive")));
    }
    let order = 2.0 * q - 1.0;
    let bias = |e: f64| renyi_bias_pla(n, alpha, e, order);
    let mut hi = 1.0 / alpha;
    while bias(hi)? <= delta {
        hi *= 2.0;
        if hi > 1e12 / alpha {
            return Err(Error::FitFailure("bias never exceeds delta".into()));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if bias(mid)? <= delta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Covariance spectrum of the PLA iterate `x_k` on `N(0, Σ)` started from
/// covariance spectrum `initial` (zeros for a point mass):
/// `s ← a²(s + 2ε)` with `a = λ/(λ + ε)`.
pub fn gaussian_cov_recursion(eigs: &[f64], eps: f64, k: usize, initial: &[f64]) -> Result<Vec<f64>> {
    Ok(gaussian_cov_trajectory(eigs, eps, k, initial)?.pop().expect("trajectory has k + 1 entries"))
}

/// All spectra `Cov(x_0), …, Cov(x_k)` of the recursion in [`gaussian_cov_recursion`].
pub fn gaussian_cov_trajectory(eigs: &[f64], eps: f64, k: usize, initial: &[f64]) -> Result<Vec<Vec<f64>>> {
    check_eigs(eigs)?;
    check_step(eps)?;
    if initial.len() != eigs.len() {
        return Err(Error::DimensionMismatch { expected: eigs.len(), got: initial.len() });
    }
    if initial.iter().any(|&s| !(s >= 0.0)) {
        return Err(Error::InvalidParameter("initial covariance spectrum must be nonnegative".into()));
    }
    let contraction: Vec<f64> = eigs.iter().map(|&l| (l / (l + eps)).powi(2)).collect();
    let mut out = Vec::with_capacity(k + 1);
    let mut s = initial.to_vec();
    out.push(s.clone());
    for _ in 0..k {
        for (si, a2) in s.iter_mut().zip(&contraction) {
            *si = a2 * (*si + 2.0 * eps);
        }
        out.push(s.clone());
    }
    Ok(out)
}
