//! Target distributions `ν ∝ exp(-f)` and their analytic constants.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{orthonormality_defect, sym_op_norm};
use crate::rng;

/// A potential `f` on `R^n` with derivative oracles and declared constants.
///
/// Implementations are immutable after construction and shared freely across
/// worker threads.
pub trait Potential: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &DVector<f64>) -> f64;

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64>;

    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64>;

    /// The slice `∇_i ∇²f(x)`, i.e. the matrix of `∂³f / ∂x_i ∂x_j ∂x_k`.
    /// `None` when the target has no analytic third derivatives.
    fn third_directional(&self, _x: &DVector<f64>, _i: usize) -> Option<DMatrix<f64>> {
        None
    }

    fn has_third_derivatives(&self) -> bool {
        false
    }

    /// Bound `L` on `‖∇²f‖_op`.
    fn smoothness(&self) -> f64;

    /// Lipschitz constant `M` of the Hessian in operator norm, if known.
    fn hessian_lipschitz(&self) -> Option<f64>;

    /// Log-Sobolev constant of `ν`, if known.
    fn lsi_constant(&self) -> Option<f64>;

    /// Whether `f` is convex everywhere. Convex targets admit proximal steps of
    /// any size.
    fn is_convex(&self) -> bool {
        false
    }
}

/// `N(mean, Q diag(eigs) Qᵀ)`, stored spectrally.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianTarget {
    mean: DVector<f64>,
    eigs: Vec<f64>,
    basis: DMatrix<f64>,
    precision: DMatrix<f64>,
}

impl GaussianTarget {
    /// `basis` holds the eigenvectors as columns and must be orthonormal to 1e-12.
    pub fn new(mean: DVector<f64>, eigs: Vec<f64>, basis: DMatrix<f64>) -> Result<Self> {
        let n = eigs.len();
        if n == 0 {
            return Err(Error::InvalidParameter("gaussian target needs at least one eigenvalue".into()));
        }
        if mean.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: mean.len() });
        }
        if basis.nrows() != n || basis.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: basis.nrows().max(basis.ncols()) });
        }
        if let Some(bad) = eigs.iter().find(|&&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::InvalidParameter(format!("eigenvalue {bad} must be positive and finite")));
        }
        let defect = orthonormality_defect(&basis);
        if defect > 1e-12 {
            return Err(Error::InvalidParameter(format!("basis is not orthonormal (defect {defect:e})")));
        }
        let inv = DVector::from_iterator(n, eigs.iter().map(|l| 1.0 / l));
        let precision = &basis * DMatrix::from_diagonal(&inv) * basis.transpose();
        Ok(Self { mean, eigs, basis, precision })
    }

    /// Zero-mean target with covariance `diag(eigs)`.
    pub fn diagonal(eigs: &[f64]) -> Result<Self> {
        let n = eigs.len();
        Self::new(DVector::zeros(n), eigs.to_vec(), DMatrix::identity(n, n))
    }

    /// `N(0, variance · I_n)`.
    pub fn isotropic(n: usize, variance: f64) -> Result<Self> {
        Self::diagonal(&vec![variance; n])
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigs
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// `Σ⁻¹ = Q Λ⁻¹ Qᵀ`.
    pub fn precision(&self) -> &DMatrix<f64> {
        &self.precision
    }

    pub fn covariance(&self) -> DMatrix<f64> {
        let d = DVector::from_vec(self.eigs.clone());
        &self.basis * DMatrix::from_diagonal(&d) * self.basis.transpose()
    }

    /// Coordinates of `x - mean` in the eigenbasis.
    pub fn to_eigen_coords(&self, x: &DVector<f64>) -> DVector<f64> {
        self.basis.transpose() * (x - &self.mean)
    }

    /// Maps eigenbasis coordinates back to the ambient space.
    pub fn from_eigen_coords(&self, c: &DVector<f64>) -> DVector<f64> {
        &self.basis * c + &self.mean
    }
}

impl Potential for GaussianTarget {
    fn dim(&self) -> usize {
        self.eigs.len()
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        let d = x - &self.mean;
        0.5 * d.dot(&(&self.precision * &d))
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.precision * (x - &self.mean)
    }

    fn hessian(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        self.precision.clone()
    }

    fn third_directional(&self, _x: &DVector<f64>, _i: usize) -> Option<DMatrix<f64>> {
        let n = self.dim();
        Some(DMatrix::zeros(n, n))
    }

    fn has_third_derivatives(&self) -> bool {
        true
    }

    fn smoothness(&self) -> f64 {
        1.0 / self.eigs.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn hessian_lipschitz(&self) -> Option<f64> {
        Some(0.0)
    }

    fn lsi_constant(&self) -> Option<f64> {
        Some(1.0 / self.eigs.iter().copied().fold(0.0, f64::max))
    }

    fn is_convex(&self) -> bool {
        true
    }
}

/// `f(x) = x²/2 + a·cos(x)` on `R`, with `|a| < 1`.
///
/// The LSI constant comes from Holley–Stroock applied to the bounded
/// perturbation `a·cos`: `α ≥ exp(-4|a|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbedQuadratic1D {
    a: f64,
}

impl PerturbedQuadratic1D {
    pub fn new(a: f64) -> Result<Self> {
        if !(a.abs() < 1.0) {
            return Err(Error::InvalidParameter(format!("amplitude {a} must satisfy |a| < 1")));
        }
        Ok(Self { a })
    }

    pub fn amplitude(&self) -> f64 {
        self.a
    }

    pub fn value_1d(&self, x: f64) -> f64 {
        0.5 * x * x + self.a * x.cos()
    }

    pub fn d1(&self, x: f64) -> f64 {
        x - self.a * x.sin()
    }

    pub fn d2(&self, x: f64) -> f64 {
        1.0 - self.a * x.cos()
    }

    pub fn d3(&self, x: f64) -> f64 {
        self.a * x.sin()
    }
}

impl Potential for PerturbedQuadratic1D {
    fn dim(&self) -> usize {
        1
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        self.value_1d(x[0])
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_element(1, self.d1(x[0]))
    }

    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, self.d2(x[0]))
    }

    fn third_directional(&self, x: &DVector<f64>, _i: usize) -> Option<DMatrix<f64>> {
        Some(DMatrix::from_element(1, 1, self.d3(x[0])))
    }

    fn has_third_derivatives(&self) -> bool {
        true
    }

    fn smoothness(&self) -> f64 {
        1.0 + self.a.abs()
    }

    fn hessian_lipschitz(&self) -> Option<f64> {
        Some(self.a.abs())
    }

    fn lsi_constant(&self) -> Option<f64> {
        Some((-4.0 * self.a.abs()).exp())
    }

    fn is_convex(&self) -> bool {
        true
    }
}

/// JSON description of a target.
///
/// `basis` is given row by row; its columns are the eigenvectors. When omitted
/// the identity is used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetSpec {
    Gaussian {
        mean: Vec<f64>,
        eigs: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        basis: Option<Vec<Vec<f64>>>,
    },
    PerturbedQuadratic {
        a: f64,
    },
}

impl TargetSpec {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn build(&self) -> Result<Target> {
        match self {
            TargetSpec::Gaussian { mean, eigs, basis } => {
                let n = eigs.len();
                let q = match basis {
                    None => DMatrix::identity(n, n),
                    Some(rows) => {
                        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                            return Err(Error::InvalidParameter(format!("basis must be {n}x{n}")));
                        }
                        DMatrix::from_fn(n, n, |i, j| rows[i][j])
                    }
                };
                let t = GaussianTarget::new(DVector::from_vec(mean.clone()), eigs.clone(), q)?;
                Ok(Target::Gaussian(t))
            }
            TargetSpec::PerturbedQuadratic { a } => Ok(Target::PerturbedQuadratic(PerturbedQuadratic1D::new(*a)?)),
        }
    }
}

/// Any of the built-in targets, for code that picks one at run time.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    Gaussian(GaussianTarget),
    PerturbedQuadratic(PerturbedQuadratic1D),
}

impl Target {
    pub fn from_json(s: &str) -> Result<Self> {
        TargetSpec::from_json(s)?.build()
    }

    pub fn as_gaussian(&self) -> Option<&GaussianTarget> {
        match self {
            Target::Gaussian(g) => Some(g),
            Target::PerturbedQuadratic(_) => None,
        }
    }

    fn inner(&self) -> &dyn Potential {
        match self {
            Target::Gaussian(g) => g,
            Target::PerturbedQuadratic(p) => p,
        }
    }
}

impl Potential for Target {
    fn dim(&self) -> usize {
        self.inner().dim()
    }
    fn value(&self, x: &DVector<f64>) -> f64 {
        self.inner().value(x)
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        self.inner().gradient(x)
    }
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        self.inner().hessian(x)
    }
    fn third_directional(&self, x: &DVector<f64>, i: usize) -> Option<DMatrix<f64>> {
        self.inner().third_directional(x, i)
    }
    fn has_third_derivatives(&self) -> bool {
        self.inner().has_third_derivatives()
    }
    fn smoothness(&self) -> f64 {
        self.inner().smoothness()
    }
    fn hessian_lipschitz(&self) -> Option<f64> {
        self.inner().hessian_lipschitz()
    }
    fn lsi_constant(&self) -> Option<f64> {
        self.inner().lsi_constant()
    }
    fn is_convex(&self) -> bool {
        self.inner().is_convex()
    }
}

const STATIONARY_MAX_ITER: usize = 200_000;

/// Gradient descent with step `1/L` until `‖∇f‖ ≤ tol`.
pub fn find_stationary_point<P: Potential + ?Sized>(p: &P, x_init: &DVector<f64>, tol: f64) -> Result<DVector<f64>> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance {tol} must be positive")));
    }
    if x_init.len() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), got: x_init.len() });
    }
    let step = 1.0 / p.smoothness();
    let mut x = x_init.clone();
    let mut best = (f64::INFINITY, x.clone());
    for _ in 0..STATIONARY_MAX_ITER {
        let g = p.gradient(&x);
        let gn = g.norm();
        if gn <= tol {
            return Ok(x);
        }
        if gn < best.0 {
            best = (gn, x.clone());
        }
        x.axpy(-step, &g, 1.0);
    }
    Err(Error::NonConvergence {
        what: "stationary point search",
        iterations: STATIONARY_MAX_ITER,
        residual: best.0,
        best: best.1.iter().copied().collect(),
    })
}

/// Empirical smoothness constants from a random scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothnessScan {
    /// Largest sampled `‖∇²f(x)‖_op`.
    pub l_hat: f64,
    /// Largest sampled `‖∇²f(x) − ∇²f(y)‖_op / ‖x − y‖`.
    pub m_hat: f64,
    /// Set when nothing was sampled.
    pub empty: bool,
}

/// Scans `sample_count` points in the cube `[-radius, radius]^n`, each paired
/// with a neighbour at a log-uniform distance in `[1e-3·radius, radius]`.
pub fn verify_smoothness<P: Potential + ?Sized>(p: &P, sample_count: usize, radius: f64, seed: u64) -> SmoothnessScan {
    if sample_count == 0 {
        return SmoothnessScan { l_hat: 0.0, m_hat: 0.0, empty: true };
    }
    let n = p.dim();
    let mut rng = rng::stream(seed, 0);
    let mut l_hat: f64 = 0.0;
    let mut m_hat: f64 = 0.0;
    for _ in 0..sample_count {
        let x = DVector::from_fn(n, |_, _| rng.random_range(-radius..=radius));
        let dir = rng::standard_normal(&mut rng, n).normalize();
        let dist = radius * 10f64.powf(-3.0 * rng.random::<f64>());
        let y = &x + dir * dist;
        let hx = p.hessian(&x);
        let hy = p.hessian(&y);
        l_hat = l_hat.max(sym_op_norm(&hx)).max(sym_op_norm(&hy));
        let gap = (&y - &x).norm();
        if gap > 0.0 {
            m_hat = m_hat.max(sym_op_norm(&(hx - hy)) / gap);
        }
    }
    SmoothnessScan { l_hat, m_hat, empty: false }
}
