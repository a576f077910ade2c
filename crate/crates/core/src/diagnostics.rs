//! Divergence estimates from ensembles and scaling fits.
//!
//! All reductions sum in input order with [`pairwise_sum`], so estimates do not
//! depend on how the ensemble was scheduled.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::pairwise_sum;
use crate::rng;
use crate::targets::{GaussianTarget, Potential};
use crate::theory::v_minus_log1p;

/// Eigenvalues of the sample covariance down to this are treated as rounding
/// noise and clipped to zero.
pub const EIGEN_FLOOR: f64 = -1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMoments {
    pub count: usize,
    pub mean: DVector<f64>,
    /// Unbiased (`N − 1`) covariance.
    pub cov: DMatrix<f64>,
    /// Standard error of each mean entry.
    pub mean_se: DVector<f64>,
    /// Standard error of each covariance entry.
    pub cov_se: DMatrix<f64>,
    /// Tiny negative eigenvalues were clipped.
    pub clipped: bool,
}

/// Cross-sample mean and covariance with per-entry standard errors.
pub fn moments(samples: &[DVector<f64>]) -> Result<EmpiricalMoments> {
    let count = samples.len();
    if count < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: count });
    }
    let n = samples[0].len();
    if let Some(bad) = samples.iter().find(|s| s.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: bad.len() });
    }
    let nf = count as f64;
    let mean = DVector::from_fn(n, |i, _| pairwise_sum(&samples.iter().map(|s| s[i]).collect::<Vec<_>>()) / nf);
    let centred: Vec<Vec<f64>> = (0..n).map(|i| samples.iter().map(|s| s[i] - mean[i]).collect()).collect();
    let mut cov = DMatrix::zeros(n, n);
    let mut cov_se = DMatrix::zeros(n, n);
    let mut buf = vec![0.0; count];
    for i in 0..n {
        for j in 0..=i {
            for (b, (a, c)) in buf.iter_mut().zip(centred[i].iter().zip(&centred[j])) {
                *b = a * c;
            }
            let m = pairwise_sum(&buf) / nf;
            for b in buf.iter_mut() {
                *b = (*b - m).powi(2);
            }
            let var_prod = pairwise_sum(&buf) / (nf - 1.0);
            cov[(i, j)] = m * nf / (nf - 1.0);
            cov[(j, i)] = cov[(i, j)];
            cov_se[(i, j)] = (var_prod / nf).sqrt();
            cov_se[(j, i)] = cov_se[(i, j)];
        }
    }
    let mean_se = DVector::from_fn(n, |i, _| (cov[(i, i)] / nf).sqrt());
    let (cov, clipped) = clip_psd(cov)?;
    Ok(EmpiricalMoments { count, mean, cov, mean_se, cov_se, clipped })
}

fn clip_psd(cov: DMatrix<f64>) -> Result<(DMatrix<f64>, bool)> {
    let se = SymmetricEigen::new(cov.clone());
    let min = se.eigenvalues.min();
    if min >= 0.0 {
        return Ok((cov, false));
    }
    if min < EIGEN_FLOOR {
        return Err(Error::Singular(format!("sample covariance has eigenvalue {min:e}")));
    }
    let clipped = se.eigenvalues.map(|v| v.max(0.0));
    let q = &se.eigenvectors;
    Ok((q * DMatrix::from_diagonal(&clipped) * q.transpose(), true))
}

/// `KL(N(mean, cov) ‖ target)` for the moment-matched Gaussian.
pub fn gaussian_fit_kl(em: &EmpiricalMoments, target: &GaussianTarget) -> Result<f64> {
    let n = target.dim();
    if em.mean.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: em.mean.len() });
    }
    let q = target.basis();
    let scale = DVector::from_iterator(n, target.eigenvalues().iter().map(|l| 1.0 / l.sqrt()));
    // Whitened covariance Λ^{-1/2} Qᵀ C Q Λ^{-1/2}; its eigenvalues are the
    // generalized eigenvalues of C against Σ.
    let mut w = q.transpose() * &em.cov * q;
    for i in 0..n {
        for j in 0..n {
            w[(i, j)] *= scale[i] * scale[j];
        }
    }
    let ratios: Vec<f64> = if n == 1 { vec![w[(0, 0)]] } else { SymmetricEigen::new(w).eigenvalues.iter().copied().collect() };
    if let Some(bad) = ratios.iter().find(|&&r| r <= 0.0) {
        return Err(Error::Singular(format!("fitted covariance is singular (whitened eigenvalue {bad:e})")));
    }
    let cov_term: f64 = ratios.iter().map(|r| v_minus_log1p(r - 1.0)).sum();
    let gap = q.transpose() * (&em.mean - target.mean());
    let mean_term: f64 = gap.iter().zip(target.eigenvalues()).map(|(d, l)| d * d / l).sum();
    Ok(0.5 * (cov_term + mean_term))
}

/// Leading-order expected excess of the plug-in estimate from `count` samples:
/// `(n + n(n+1)/2) / (2 count)`, half a unit per fitted parameter.
pub fn plug_in_bias_floor(dim: usize, count: usize) -> f64 {
    let params = dim + dim * (dim + 1) / 2;
    params as f64 / (2.0 * count as f64)
}

/// Plug-in KL with a batch-means standard error over `groups` contiguous
/// subsets of the samples.
pub fn gaussian_fit_kl_with_se(samples: &[DVector<f64>], target: &GaussianTarget, groups: usize) -> Result<(f64, f64)> {
    if groups < 2 {
        return Err(Error::InvalidParameter("need at least two groups".into()));
    }
    let per = samples.len() / groups;
    if per < 2 {
        return Err(Error::InsufficientSamples { needed: 2 * groups, got: samples.len() });
    }
    let kl = gaussian_fit_kl(&moments(samples)?, target)?;
    let parts: Vec<f64> = samples
        .chunks_exact(per)
        .take(groups)
        .map(|c| moments(c).and_then(|m| gaussian_fit_kl(&m, target)))
        .collect::<Result<_>>()?;
    let g = groups as f64;
    let mean = pairwise_sum(&parts) / g;
    let var = pairwise_sum(&parts.iter().map(|p| (p - mean).powi(2)).collect::<Vec<_>>()) / (g - 1.0);
    Ok((kl, (var / g).sqrt()))
}

/// Uniform histogram grid on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    pub lo: f64,
    pub hi: f64,
    pub bins: usize,
}

impl Grid1D {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if !(lo < hi && lo.is_finite() && hi.is_finite()) || bins == 0 {
            return Err(Error::InvalidParameter(format!("bad grid [{lo}, {hi}] with {bins} bins")));
        }
        Ok(Self { lo, hi, bins })
    }

    /// Freedman–Diaconis bin width over the sample range widened to at least
    /// mean ± 5 standard deviations.
    pub fn freedman_diaconis(samples: &[f64]) -> Result<Self> {
        if samples.len() < 4 {
            return Err(Error::InsufficientSamples { needed: 4, got: samples.len() });
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let quantile = |p: f64| {
            let pos = p * (sorted.len() - 1) as f64;
            let i = pos.floor() as usize;
            let frac = pos - i as f64;
            sorted[i] + frac * (sorted[(i + 1).min(sorted.len() - 1)] - sorted[i])
        };
        let iqr = quantile(0.75) - quantile(0.25);
        let (mean, sd) = mean_sd(samples);
        let lo = sorted[0].min(mean - 5.0 * sd);
        let hi = sorted[sorted.len() - 1].max(mean + 5.0 * sd);
        let width = 2.0 * iqr / (samples.len() as f64).cbrt();
        if !(width > 0.0) {
            return Err(Error::InvalidParameter("samples have zero interquartile range".into()));
        }
        Grid1D::new(lo, hi, ((hi - lo) / width).ceil() as usize)
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.bins as f64
    }

    fn bin_of(&self, x: f64) -> Option<usize> {
        if !(x >= self.lo && x <= self.hi) {
            return None;
        }
        Some((((x - self.lo) / self.width()) as usize).min(self.bins - 1))
    }
}

fn mean_sd(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = pairwise_sum(samples) / n;
    let var = pairwise_sum(&samples.iter().map(|x| (x - mean).powi(2)).collect::<Vec<_>>()) / (n - 1.0);
    (mean, var.sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistogramKl {
    pub kl: f64,
    /// Some bins were empty (in the samples or numerically in `ν`) and both
    /// distributions received additive smoothing.
    pub smoothed: bool,
    pub occupied_bins: usize,
    /// Samples falling outside the grid; they are excluded.
    pub outside: usize,
}

const SMOOTHING: f64 = 1e-12;
const SUB_INTERVALS: usize = 16;

/// Discrete `KL(histogram ‖ ν)` with bin masses of `ν ∝ e^{−f}` from
/// trapezoidal quadrature. The grid must span at least 8 sample standard
/// deviations.
pub fn kl_vs_quadrature_1d<P: Potential + ?Sized>(samples: &[f64], p: &P, grid: &Grid1D) -> Result<HistogramKl> {
    if p.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: p.dim() });
    }
    if samples.len() < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: samples.len() });
    }
    let (_, sd) = mean_sd(samples);
    if grid.hi - grid.lo < 8.0 * sd {
        return Err(Error::InvalidParameter(format!(
            "grid width {} covers fewer than 8 standard deviations ({sd})",
            grid.hi - grid.lo
        )));
    }
    let mut counts = vec![0usize; grid.bins];
    let mut outside = 0;
    for &x in samples {
        match grid.bin_of(x) {
            Some(b) => counts[b] += 1,
            None => outside += 1,
        }
    }
    let inside = (samples.len() - outside) as f64;
    if inside == 0.0 {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    let masses = bin_masses(p, grid);
    let smoothed = counts.contains(&0) || masses.contains(&0.0);
    let (pad, norm_p, norm_q) = if smoothed {
        let b = grid.bins as f64;
        (SMOOTHING, 1.0 + SMOOTHING * b, 1.0 + SMOOTHING * b)
    } else {
        (0.0, 1.0, 1.0)
    };
    let terms: Vec<f64> = counts
        .iter()
        .zip(&masses)
        .map(|(&c, &q)| {
            let pi = (c as f64 / inside + pad) / norm_p;
            let qi = (q + pad) / norm_q;
            if pi > 0.0 {
                pi * (pi / qi).ln()
            } else {
                0.0
            }
        })
        .collect();
    Ok(HistogramKl {
        kl: pairwise_sum(&terms),
        smoothed,
        occupied_bins: counts.iter().filter(|&&c| c > 0).count(),
        outside,
    })
}

/// Normalized `ν` mass of each bin, by the trapezoid rule on a refined grid.
fn bin_masses<P: Potential + ?Sized>(p: &P, grid: &Grid1D) -> Vec<f64> {
    let h = grid.width() / SUB_INTERVALS as f64;
    let nodes = grid.bins * SUB_INTERVALS + 1;
    let log_density: Vec<f64> = (0..nodes)
        .map(|i| -p.value(&DVector::from_element(1, grid.lo + i as f64 * h)))
        .collect();
    let shift = log_density.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let density: Vec<f64> = log_density.iter().map(|l| (l - shift).exp()).collect();
    let raw: Vec<f64> = (0..grid.bins)
        .map(|b| {
            let s = &density[b * SUB_INTERVALS..=(b + 1) * SUB_INTERVALS];
            h * (0.5 * (s[0] + s[SUB_INTERVALS]) + s[1..SUB_INTERVALS].iter().sum::<f64>())
        })
        .collect();
    let z = pairwise_sum(&raw);
    raw.into_iter().map(|m| m / z).collect()
}

/// Exact sampler for a 1-D `ν ∝ e^{−f}` using a Gaussian envelope
/// `N(centre, var)` with `f(x) ≥ (x − centre)²/(2 var) − log_bound`.
#[derive(Debug, Clone)]
pub struct RejectionSampler1D<'a, P: Potential + ?Sized> {
    p: &'a P,
    centre: f64,
    sd: f64,
    var: f64,
    log_bound: f64,
}

impl<'a, P: Potential + ?Sized> RejectionSampler1D<'a, P> {
    pub fn new(p: &'a P, centre: f64, var: f64, log_bound: f64) -> Result<Self> {
        if p.dim() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, got: p.dim() });
        }
        if !(var > 0.0 && log_bound.is_finite()) {
            return Err(Error::InvalidParameter("envelope variance must be positive".into()));
        }
        Ok(Self { p, centre, sd: var.sqrt(), var, log_bound })
    }

    fn log_accept(&self, x: f64) -> f64 {
        let f = self.p.value(&DVector::from_element(1, x));
        (x - self.centre).powi(2) / (2.0 * self.var) - self.log_bound - f
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        loop {
            let z: f64 = rng.sample(rand_distr::StandardNormal);
            let x = self.centre + self.sd * z;
            let la = self.log_accept(x);
            if la > 1e-12 {
                return Err(Error::InvalidParameter(format!("envelope violated at x = {x}")));
            }
            let u: f64 = rng.random();
            if u.ln() < la {
                return Ok(x);
            }
        }
    }

    /// `count` draws from stream `(seed, 0)`.
    pub fn sample(&self, count: usize, seed: u64) -> Result<Vec<f64>> {
        let mut rng = rng::stream(seed, 0);
        (0..count).map(|_| self.draw(&mut rng)).collect()
    }
}

/// Envelope for `x²/2 + a cos x`: `f ≥ x²/2 − |a|`.
pub fn perturbed_quadratic_sampler(p: &crate::targets::PerturbedQuadratic1D) -> RejectionSampler1D<'_, crate::targets::PerturbedQuadratic1D> {
    RejectionSampler1D::new(p, 0.0, 1.0, p.amplitude().abs()).expect("valid envelope")
}

/// Histogram KL of `count` exact draws from `ν` on `grid`, averaged over `reps`
/// independent seeds: the estimator's floor when the samples carry no bias.
pub fn binning_floor<P: Potential + ?Sized>(
    sampler: &RejectionSampler1D<'_, P>,
    grid: &Grid1D,
    count: usize,
    reps: usize,
    seed: u64,
) -> Result<f64> {
    if reps == 0 {
        return Err(Error::InvalidParameter("need at least one repetition".into()));
    }
    let vals: Vec<f64> = (0..reps)
        .map(|r| {
            let s = sampler.sample(count, seed.wrapping_add(r as u64))?;
            Ok(kl_vs_quadrature_1d(&s, sampler.p, grid)?.kl)
        })
        .collect::<Result<_>>()?;
    Ok(pairwise_sum(&vals) / reps as f64)
}

/// Least-squares line through `(log ε, log bias)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// `r_squared ≥ 0.95`.
    pub reliable: bool,
}

pub const RELIABLE_R2: f64 = 0.95;

pub fn bias_scaling_fit(eps: &[f64], bias: &[f64]) -> Result<ScalingFit> {
    if eps.len() != bias.len() {
        return Err(Error::DimensionMismatch { expected: eps.len(), got: bias.len() });
    }
    if eps.len() < 4 {
        return Err(Error::InsufficientSamples { needed: 4, got: eps.len() });
    }
    if let Some(b) = bias.iter().find(|&&b| !(b > 0.0 && b.is_finite())) {
        return Err(Error::FitFailure(format!("bias {b} is not positive and finite")));
    }
    if let Some(e) = eps.iter().find(|&&e| !(e > 0.0)) {
        return Err(Error::FitFailure(format!("step {e} is not positive")));
    }
    let xs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = bias.iter().map(|b| b.ln()).collect();
    let m = xs.len() as f64;
    let mx = pairwise_sum(&xs) / m;
    let my = pairwise_sum(&ys) / m;
    let sxx = pairwise_sum(&xs.iter().map(|x| (x - mx).powi(2)).collect::<Vec<_>>());
    let sxy = pairwise_sum(&xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).collect::<Vec<_>>());
    let syy = pairwise_sum(&ys.iter().map(|y| (y - my).powi(2)).collect::<Vec<_>>());
    if sxx == 0.0 {
        return Err(Error::FitFailure("all step sizes are equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).min(1.0) };
    Ok(ScalingFit { slope, intercept, r_squared, reliable: r_squared >= RELIABLE_R2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::targets::PerturbedQuadratic1D;
    use crate::theory::{gaussian_kl, kl_bias_pla, pla_limit_gaussian};

    fn normals(count: usize, dim: usize, sd: f64, seed: u64) -> Vec<DVector<f64>> {
        let mut r = rng::stream(seed, 0);
        (0..count).map(|_| rng::standard_normal(&mut r, dim) * sd).collect()
    }

    #[test]
    fn identical_samples_have_zero_covariance() {
        let s = vec![DVector::from_column_slice(&[1.0, 2.0]); 10];
        let m = moments(&s).unwrap();
        assert_eq!(m.cov, DMatrix::zeros(2, 2));
        assert_eq!(m.mean, DVector::from_column_slice(&[1.0, 2.0]));
    }

    #[test]
    fn single_sample_rejected() {
        let s = vec![DVector::from_column_slice(&[1.0])];
        assert!(matches!(moments(&s), Err(Error::InsufficientSamples { .. })));
    }

    #[test]
    fn standard_normal_moments_within_three_se() {
        let m = moments(&normals(100_000, 3, 1.0, 1)).unwrap();
        for i in 0..3 {
            assert!(m.mean[i].abs() < 3.0 * m.mean_se[i]);
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((m.cov[(i, j)] - want).abs() < 3.0 * m.cov_se[(i, j)], "({i},{j}) {}", m.cov[(i, j)]);
            }
        }
    }

    fn exact_moments(mean: &[f64], cov: DMatrix<f64>) -> EmpiricalMoments {
        let n = mean.len();
        EmpiricalMoments {
            count: usize::MAX,
            mean: DVector::from_column_slice(mean),
            cov,
            mean_se: DVector::zeros(n),
            cov_se: DMatrix::zeros(n, n),
            clipped: false,
        }
    }

    #[test]
    fn fit_kl_zero_at_target() {
        let basis = DMatrix::from_row_slice(2, 2, &[0.6, -0.8, 0.8, 0.6]);
        let t = GaussianTarget::new(DVector::from_column_slice(&[1.0, -1.0]), vec![0.5, 2.0], basis).unwrap();
        let em = exact_moments(&[1.0, -1.0], t.covariance());
        assert!(gaussian_fit_kl(&em, &t).unwrap().abs() < 1e-14);
    }

    #[test]
    fn fit_kl_of_exact_limit_is_forward_kl() {
        let t = GaussianTarget::diagonal(&[1.0, 3.0]).unwrap();
        let lim = pla_limit_gaussian(&[1.0, 3.0], 0.5).unwrap();
        let em = exact_moments(&[0.0, 0.0], DMatrix::from_diagonal(&DVector::from_column_slice(&lim)));
        let kl = gaussian_fit_kl(&em, &t).unwrap();
        assert!((kl - gaussian_kl(&lim, &[1.0, 3.0]).unwrap()).abs() < 1e-14);
        // The classical closed form is the reverse direction and is larger here.
        assert!(kl < kl_bias_pla(&[1.0, 3.0], 0.5).unwrap());
    }

    #[test]
    fn fit_kl_singular_rejected() {
        let t = GaussianTarget::diagonal(&[1.0, 1.0]).unwrap();
        let em = exact_moments(&[0.0, 0.0], DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]));
        assert!(matches!(gaussian_fit_kl(&em, &t), Err(Error::Singular(_))));
    }

    #[test]
    fn batch_se_is_positive_and_small() {
        let t = GaussianTarget::diagonal(&[1.0]).unwrap();
        let (kl, se) = gaussian_fit_kl_with_se(&normals(40_000, 1, 1.0, 9), &t, 20).unwrap();
        assert!(se > 0.0 && se < 1e-3, "{se}");
        assert!(kl < 5.0 * se + plug_in_bias_floor(1, 40_000) * 5.0);
    }

    #[test]
    fn histogram_kl_wide_gaussian() {
        let nu = GaussianTarget::diagonal(&[1.0]).unwrap();
        let s: Vec<f64> = normals(100_000, 1, 2.0, 4).iter().map(|v| v[0]).collect();
        let grid = Grid1D::freedman_diaconis(&s).unwrap();
        let r = kl_vs_quadrature_1d(&s, &nu, &grid).unwrap();
        let want = 0.5 * (4.0 - 1.0 - 4.0f64.ln());
        assert!((want - 0.806853).abs() < 1e-6);
        assert!((r.kl - want).abs() < 0.05 * want, "{}", r.kl);
        assert_eq!(r.kl, kl_vs_quadrature_1d(&s, &nu, &grid).unwrap().kl);
    }

    #[test]
    fn histogram_grid_must_cover_eight_sd() {
        let nu = GaussianTarget::diagonal(&[1.0]).unwrap();
        let s: Vec<f64> = normals(1000, 1, 1.0, 4).iter().map(|v| v[0]).collect();
        let narrow = Grid1D::new(-3.0, 3.0, 30).unwrap();
        assert!(kl_vs_quadrature_1d(&s, &nu, &narrow).is_err());
    }

    #[test]
    fn exact_samples_sit_at_binning_floor() {
        let p = PerturbedQuadratic1D::new(0.5).unwrap();
        let sampler = perturbed_quadratic_sampler(&p);
        let s = sampler.sample(20_000, 3).unwrap();
        let grid = Grid1D::freedman_diaconis(&s).unwrap();
        let kl = kl_vs_quadrature_1d(&s, &p, &grid).unwrap();
        // Chi-square heuristic for the floor, (occupied − 1)/(2N), with slack.
        let heuristic = (kl.occupied_bins as f64 - 1.0) / (2.0 * 20_000.0);
        assert!(kl.kl < 3.0 * heuristic, "{} vs {heuristic}", kl.kl);
        let floor = binning_floor(&sampler, &grid, 20_000, 4, 100).unwrap();
        assert!(floor > 0.0 && floor < 3.0 * heuristic);
    }

    #[test]
    fn rejection_sampler_moments() {
        // E[x²] for a = 0 is 1.
        let p = PerturbedQuadratic1D::new(0.0).unwrap();
        let s = perturbed_quadratic_sampler(&p).sample(50_000, 8).unwrap();
        let m2 = s.iter().map(|x| x * x).sum::<f64>() / s.len() as f64;
        assert!((m2 - 1.0).abs() < 0.03);
    }

    #[test]
    fn rejection_sampler_detects_bad_envelope() {
        let p = GaussianTarget::diagonal(&[4.0]).unwrap();
        let bad = RejectionSampler1D::new(&p, 0.0, 1.0, 0.0).unwrap();
        assert!(bad.sample(1000, 1).is_err());
    }

    #[test]
    fn scaling_fit_on_exact_bias() {
        let eps: Vec<f64> = (0..10).map(|i| 1e-3 * 10f64.powf(i as f64 / 9.0)).collect();
        let bias: Vec<f64> = eps.iter().map(|&e| kl_bias_pla(&[1.0], e).unwrap()).collect();
        let fit = bias_scaling_fit(&eps, &bias).unwrap();
        assert!((1.95..=2.05).contains(&fit.slope) && fit.reliable);
    }

    #[test]
    fn scaling_fit_exact_power_law() {
        let eps = [0.01, 0.02, 0.05, 0.1, 0.2];
        let bias: Vec<f64> = eps.iter().map(|e| 0.7 * e * e * e).collect();
        let fit = bias_scaling_fit(&eps, &bias).unwrap();
        assert!((fit.slope - 3.0).abs() < 1e-6);
        assert!((fit.intercept - 0.7f64.ln()).abs() < 1e-6);
    }

    #[test]
    fn scaling_fit_rejects_bad_input() {
        assert!(bias_scaling_fit(&[0.1, 0.2, 0.3], &[1.0, 2.0, 3.0]).is_err());
        assert!(matches!(bias_scaling_fit(&[0.1, 0.2, 0.3, 0.4], &[1.0, 0.0, 3.0, 4.0]), Err(Error::FitFailure(_))));
    }
}
