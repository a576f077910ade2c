//! End-to-end acceptance criteria A1–A12.
//!
//! Prints one PASS/FAIL line per criterion with the measured quantities and
//! wall time. Criteria listed in `KNOWN_UNATTAINABLE` are still run and still
//! print FAIL; they do not fail the process, but if one of them starts passing
//! the run fails so the list gets revisited. Any other failure exits nonzero.
//!
//! Optional argument: run a single criterion by id, e.g. `A10`.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use proxlangevin::diagnostics::{
    binning_floor, bias_scaling_fit, kl_vs_quadrature_1d, moments, perturbed_quadratic_sampler, Grid1D,
};
use proxlangevin::prox::{gaussian_prox_closed_form, prox_forward, prox_step};
use proxlangevin::samplers::{run_ensemble, Algorithm, ChainConfig, InitSpec};
use proxlangevin::sde_lab::{admissible_time, check_lemma4, verify_sde_paths, Integrator, SdeCheck};
use proxlangevin::targets::{GaussianTarget, PerturbedQuadratic1D, Potential, TargetSpec};
use proxlangevin::theory::{
    budget_cor2, gaussian_kl, kl_bias_pla, kl_bias_ula, kl_bound_thm1, pla_limit_gaussian, renyi_bias_pla,
    renyi_bias_ula, ula_limit_gaussian, BoundParams, Divergence,
};
use proxlangevin::{rng, ProxConfig, ProxSolver};
use proxlangevin_cli::commands::{cmd_bound_check, path_passes};
use proxlangevin_cli::config::{
    BiasSweepConfig, BoundCheckConfig, ConfigFile, EmpiricalSpec, EpsGrid, Experiment, ProxBenchConfig, SampleConfig,
    SdeVerifyConfig,
};
use rand::Rng;

/// Criteria whose literal statement cannot hold for a correct implementation.
/// See the project decisions log for the analysis of each.
const KNOWN_UNATTAINABLE: &[(&str, &str)] = &[
    (
        "A2",
        "the closed-form bias is KL(target || limit); gaussian_kl(limit, target) is the other direction",
    ),
    (
        "A9",
        "Euler-Maruyama has strong order 1/2 when the diffusion depends on x, as it does for the perturbed target",
    ),
];

struct Outcome {
    pass: bool,
    detail: String,
    info: Vec<String>,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into(), info: Vec::new() }
    }

    fn with_info(mut self, line: impl Into<String>) -> Self {
        self.info.push(line.into());
        self
    }
}

struct Criterion {
    id: &'static str,
    title: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

// ---------------------------------------------------------------- A1

fn a1() -> Outcome {
    let p = GaussianTarget::diagonal(&[1.0]).unwrap();
    let cfg = ChainConfig::new(0.5, 200, 20_000, 1, InitSpec::GaussianAtStationary).with_thinning(200);
    let trace = run_ensemble(&p, &cfg, Algorithm::Pla).unwrap();
    let em = moments(&trace.final_iterates()).unwrap();
    let want = pla_limit_gaussian(&[1.0], 0.5).unwrap()[0];
    let (var, se) = (em.cov[(0, 0)], em.cov_se[(0, 0)]);
    let z = (var - want) / se;
    Outcome::new(z.abs() <= 3.0, format!("variance {var:.5} vs {want} (se {se:.2e}, {z:+.2} se)"))
}

// ---------------------------------------------------------------- A2

fn a2_grid() -> (Vec<f64>, Vec<f64>) {
    (log_grid(1e-3, 1.5, 20), vec![0.5, 1.0, 2.0, 4.0, 8.0])
}

fn a2() -> Outcome {
    let (eps_grid, lambdas) = a2_grid();
    let (mut fwd, mut rev, mut ula_fwd, mut ula_rev, mut ula_points) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0);
    for &eps in &eps_grid {
        for &l in &lambdas {
            let pla = pla_limit_gaussian(&[l], eps).unwrap();
            let bias = kl_bias_pla(&[l], eps).unwrap();
            fwd = fwd.max((gaussian_kl(&pla, &[l]).unwrap() - bias).abs());
            rev = rev.max((gaussian_kl(&[l], &pla).unwrap() - bias).abs());
            if let Divergence::Finite(b) = kl_bias_ula(&[l], eps).unwrap() {
                let ula = ula_limit_gaussian(&[l], eps).unwrap();
                ula_fwd = ula_fwd.max((gaussian_kl(&ula, &[l]).unwrap() - b).abs());
                ula_rev = ula_rev.max((gaussian_kl(&[l], &ula).unwrap() - b).abs());
                ula_points += 1;
            }
        }
    }
    Outcome::new(
        fwd <= 1e-12 && ula_fwd <= 1e-12,
        format!("max |gaussian_kl(limit, target) - bias|: PLA {fwd:.3e}, ULA {ula_fwd:.3e} ({ula_points} finite points); tol 1e-12"),
    )
    .with_info(format!("reverse direction gaussian_kl(target, limit): PLA {rev:.3e}, ULA {ula_rev:.3e}"))
}

// ---------------------------------------------------------------- A3

fn a3() -> Outcome {
    let (eps_grid, lambdas) = a2_grid();
    let spectra: Vec<Vec<f64>> = lambdas.iter().map(|&l| vec![l]).chain([vec![0.5, 1.0, 3.0], vec![1.0; 10]]).collect();
    let (mut checked, mut violations) = (0, 0);
    for eigs in &spectra {
        for &eps in &eps_grid {
            if let Divergence::Finite(u) = kl_bias_ula(eigs, eps).unwrap() {
                checked += 1;
                violations += usize::from(kl_bias_pla(eigs, eps).unwrap() >= u);
            }
        }
    }
    Outcome::new(violations == 0 && checked > 0, format!("{violations} violations over {checked} finite points"))
}

// ---------------------------------------------------------------- A4

fn a4() -> Outcome {
    let grid = log_grid(1e-3, 1e-2, 12);
    let mut pass = true;
    let mut parts = Vec::new();
    for eigs in [vec![1.0], vec![1.0, 2.0, 4.0]] {
        let pla: Vec<f64> = grid.iter().map(|&e| kl_bias_pla(&eigs, e).unwrap()).collect();
        let fit = bias_scaling_fit(&grid, &pla).unwrap();
        let c2_want: f64 = eigs.iter().map(|l| 1.0 / (16.0 * l * l)).sum();
        let c3_want: f64 = eigs.iter().map(|l| 1.0 / (24.0 * l * l * l)).sum();
        let e = grid[0];
        let c2 = pla[0] / (e * e);
        let c3 = (kl_bias_ula(&eigs, e).unwrap().value() - pla[0]) / e.powi(3);
        let (r2, r3) = ((c2 / c2_want - 1.0).abs(), (c3 / c3_want - 1.0).abs());
        pass &= (1.95..=2.05).contains(&fit.slope) && r2 <= 0.05 && r3 <= 0.05;
        parts.push(format!("eigs {eigs:?}: slope {:.4}, c2 rel.err {r2:.2e}, cubic gap rel.err {r3:.2e}", fit.slope));
    }
    Outcome::new(pass, parts.join("; "))
}

// ---------------------------------------------------------------- A5

fn a5() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bound.csv");
    let cfg = BoundCheckConfig {
        alpha: 1.0,
        l: 1.0,
        m: 0.0,
        n: 1,
        delta: None,
        eps_grid: None,
        steps: 500,
        init_var: None,
        stride: 1,
        out: out.clone(),
        chart: false,
    };
    cmd_bound_check(&cfg, &mut std::io::sink()).unwrap();
    let mut r = csv::Reader::from_path(&out).unwrap();
    let (mut rows, mut steps) = (0, std::collections::BTreeSet::new());
    let (mut min_slack, mut min_one) = (f64::INFINITY, f64::INFINITY);
    let mut max_eps: f64 = 0.0;
    for rec in r.records() {
        let rec = rec.unwrap();
        let eps: f64 = rec[0].parse().unwrap();
        max_eps = max_eps.max(eps);
        steps.insert(rec[0].to_string());
        rows += 1;
        min_slack = min_slack.min(rec[4].parse().unwrap());
        if !rec[5].is_empty() {
            min_one = min_one.min(rec[5].parse().unwrap());
        }
    }
    let pass = steps.len() == 20 && rows == 20 * 501 && max_eps <= 3.0 / 32.0 && min_slack >= 0.0 && min_one >= 0.0;
    Outcome::new(
        pass,
        format!("{} step sizes up to {max_eps}, {rows} rows; min slack {min_slack:.3e}, min one-step slack {min_one:.3e}", steps.len()),
    )
}

// ---------------------------------------------------------------- A6

fn a6() -> Outcome {
    let v = renyi_bias_pla(1, 1.0, 0.5, 2.0).unwrap();
    let ula_inf = renyi_bias_ula(1, 1.0, 0.5, 4.0).unwrap() == Divergence::Infinite;
    let (mut checked, mut violations) = (0, 0);
    for &q in &[1.1, 1.5, 2.0, 3.0, 4.0, 8.0] {
        for &eps in &log_grid(1e-3, 1.0, 20) {
            for &(n, alpha) in &[(1, 1.0), (5, 0.5), (3, 2.0)] {
                if let Divergence::Finite(u) = renyi_bias_ula(n, alpha, eps, q).unwrap() {
                    checked += 1;
                    violations += usize::from(renyi_bias_pla(n, alpha, eps, q).unwrap() >= u);
                }
            }
        }
    }
    Outcome::new(
        (v - 0.020411).abs() <= 1e-5 && ula_inf && violations == 0,
        format!("R_2 PLA bias {v:.6} (want 0.020411), ULA q=4 infinite: {ula_inf}, ordering violations {violations}/{checked}"),
    )
}

// ---------------------------------------------------------------- A7

fn rotated_gaussian() -> GaussianTarget {
    let (c, s) = (0.6f64, 0.8f64);
    let q = DMatrix::from_row_slice(3, 3, &[c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0]);
    GaussianTarget::new(DVector::from_vec(vec![0.5, -1.0, 2.0]), vec![0.3, 1.0, 2.5], q).unwrap()
}

fn prox_trials<P: Potential>(p: &P, gaussian: Option<&GaussianTarget>, seed: u64) -> (usize, f64, f64, f64) {
    let mut rng = rng::stream(seed, 0);
    let (mut bad, mut worst_res, mut worst_closed, mut worst_round) = (0, 0.0f64, 0.0f64, 0.0f64);
    for i in 0..1000 {
        let solver = if i % 2 == 0 { ProxSolver::Newton } else { ProxSolver::GradientDescent };
        // Tight enough that solution error (at most the residual here) sits well
        // under the 1e-10 closed-form tolerance.
        let cfg = ProxConfig { solver, tol: 1e-12, ..ProxConfig::default() };
        let y = DVector::from_fn(p.dim(), |_, _| rng.random_range(-5.0..5.0));
        let eps = rng.random_range(0.01..0.6);
        let out = prox_step(p, &y, eps, &cfg).unwrap();
        let threshold = cfg.threshold(&y);
        bad += usize::from(out.residual > threshold);
        worst_res = worst_res.max(out.residual / threshold);
        worst_round = worst_round.max((prox_forward(p, &out.x, eps) - &y).norm() / threshold);
        if let Some(g) = gaussian {
            worst_closed = worst_closed.max((gaussian_prox_closed_form(g, &y, eps) - &out.x).norm());
        }
    }
    (bad, worst_res, worst_closed, worst_round)
}

fn a7() -> Outcome {
    let g = rotated_gaussian();
    let pq = PerturbedQuadratic1D::new(0.5).unwrap();
    let (gb, gr, gc, gt) = prox_trials(&g, Some(&g), 7);
    let (pb, pr, _, pt) = prox_trials(&pq, None, 8);
    Outcome::new(
        gb == 0 && pb == 0 && gc <= 1e-10 && gr <= 1.0 && pr <= 1.0 && gt <= 1.0 && pt <= 1.0,
        format!(
            "gaussian: {gb} over tol, residual/tol <= {gr:.2}, closed-form gap {gc:.2e}; perturbed: {pb} over tol, residual/tol <= {pr:.2}; round trip/tol <= {:.2}",
            gt.max(pt)
        ),
    )
}

// ---------------------------------------------------------------- A8

fn lemma4_violations<P: Potential>(p: &P, seed: u64) -> (usize, f64) {
    let t_max = admissible_time(p).unwrap();
    let mut rng = rng::stream(seed, 0);
    let mut violations = 0;
    let mut min_slack = f64::INFINITY;
    for _ in 0..500 {
        let x = DVector::from_fn(p.dim(), |_, _| rng.random_range(-4.0..4.0));
        let t = t_max * rng.random_range(0.0..=1.0f64).max(1e-6);
        let r = check_lemma4(p, &x, t).unwrap();
        violations += usize::from(!r.holds());
        min_slack = min_slack.min(r.eig_lower_slack).min(r.eig_upper_slack).min(r.mu_tilde_slack).min(r.dg_slack);
    }
    (violations, min_slack)
}

fn a8() -> Outcome {
    let (v1, s1) = lemma4_violations(&PerturbedQuadratic1D::new(0.5).unwrap(), 11);
    let (v3, s3) = lemma4_violations(&rotated_gaussian(), 12);
    Outcome::new(v1 + v3 == 0, format!("violations: perturbed {v1}/500, gaussian 3d {v3}/500; min slack {:.3e}", s1.min(s3)))
}

// ---------------------------------------------------------------- A9

const SUBSTEPS: [usize; 3] = [100, 200, 400];

fn sde_summary<P: Potential>(p: &P, integrator: Integrator) -> (usize, usize, f64) {
    let t_end = admissible_time(p).unwrap();
    let x0 = DVector::from_element(p.dim(), 1.0);
    let checks: Vec<SdeCheck> = verify_sde_paths(p, &x0, t_end, &SUBSTEPS, 32, 2024, integrator).unwrap();
    let passing = checks.iter().filter(|c| path_passes(c)).count();
    let ratios: Vec<f64> = checks.iter().flat_map(|c| c.ratios()).collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    (passing, checks.len(), mean)
}

fn a9() -> Outcome {
    let quad = GaussianTarget::diagonal(&[1.0]).unwrap();
    let pq = PerturbedQuadratic1D::new(0.5).unwrap();
    let (qp, qn, qm) = sde_summary(&quad, Integrator::EulerMaruyama);
    let (pp, pn, pm) = sde_summary(&pq, Integrator::EulerMaruyama);
    let (mp, mn, mm) = sde_summary(&pq, Integrator::Milstein);
    let need = |n: usize| (0.9 * n as f64).ceil() as usize;
    Outcome::new(
        qp >= need(qn) && pp >= need(pn),
        format!("Euler-Maruyama paths passing: quadratic {qp}/{qn} (mean ratio {qm:.3}), perturbed {pp}/{pn} (mean ratio {pm:.3}); need 90%"),
    )
    .with_info(format!("Milstein on the perturbed target: {mp}/{mn} paths pass (mean ratio {mm:.3})"))
}

// ---------------------------------------------------------------- A10

fn a10() -> Outcome {
    const COUNT: usize = 100_000;
    let p = PerturbedQuadratic1D::new(0.5).unwrap();
    let sampler = perturbed_quadratic_sampler(&p);
    let reference = sampler.sample(COUNT, 99).unwrap();
    let grid = Grid1D::freedman_diaconis(&reference).unwrap();
    let floor = binning_floor(&sampler, &grid, COUNT, 4, 1000).unwrap();
    let mut kls = Vec::new();
    let mut smoothed = false;
    for &(eps, steps) in &[(0.2, 60), (0.1, 120), (0.05, 240)] {
        let cfg = ChainConfig::new(eps, steps, COUNT, 5, InitSpec::GaussianAtStationary).with_thinning(steps);
        let trace = run_ensemble(&p, &cfg, Algorithm::Pla).unwrap();
        let xs: Vec<f64> = trace.final_iterates().iter().map(|v| v[0]).collect();
        let h = kl_vs_quadrature_1d(&xs, &p, &grid).unwrap();
        smoothed |= h.smoothed;
        kls.push(h.kl);
    }
    let monotone = kls.windows(2).all(|w| w[1] < w[0]);
    let last = kls[2];
    Outcome::new(
        monotone && last < 0.01 + floor,
        format!(
            "KL at eps 0.2/0.1/0.05: {:.3e} / {:.3e} / {:.3e}; binning floor {floor:.3e} ({} bins){}",
            kls[0],
            kls[1],
            kls[2],
            grid.bins,
            if smoothed { ", smoothing applied" } else { "" }
        ),
    )
}

// ---------------------------------------------------------------- A11

fn a11() -> Outcome {
    let mut rng = rng::stream(31, 0);
    let (mut over, mut scaled, mut off, mut capped) = (0, 0, 0, 0);
    let mut worst_ratio_err: f64 = 0.0;
    for _ in 0..100 {
        let alpha = 10f64.powf(rng.random_range(-1.0..0.5));
        let l = alpha * 10f64.powf(rng.random_range(0.0..1.0));
        let m = if rng.random_bool(0.3) { 0.0 } else { rng.random_range(0.0..2.0) };
        let n = rng.random_range(1..=20);
        let delta = 10f64.powf(rng.random_range(-5.0..-1.0));
        let h0 = 10f64.powf(rng.random_range(-1.0..2.0));
        let b = budget_cor2(alpha, l, m, n, delta, h0).unwrap();
        let bound = kl_bound_thm1(&BoundParams { alpha, l, m, n, eps: b.eps, k: b.k, h0 }).unwrap();
        over += usize::from(bound > delta * (1.0 + 1e-12));
        let half = budget_cor2(alpha, l, m, n, delta / 2.0, h0).unwrap();
        if b.capped || half.capped {
            capped += 1;
            continue;
        }
        scaled += 1;
        let err = (half.eps / b.eps * std::f64::consts::SQRT_2 - 1.0).abs();
        worst_ratio_err = worst_ratio_err.max(err);
        off += usize::from(err > 0.01);
    }
    Outcome::new(
        over == 0 && off == 0 && scaled > 0,
        format!("bound > delta in {over}/100; halving delta: worst |ratio*sqrt2 - 1| {worst_ratio_err:.2e} over {scaled} uncapped draws ({capped} capped)"),
    )
}

// ---------------------------------------------------------------- A12

fn a12_configs(dir: &Path) -> Vec<ConfigFile> {
    let gauss = TargetSpec::Gaussian { mean: vec![0.0, 1.0], eigs: vec![1.0, 0.5], basis: None };
    let pq = TargetSpec::PerturbedQuadratic { a: 0.5 };
    let out = |name: &str| dir.join(name);
    vec![
        Experiment::Sample(SampleConfig {
            target: pq.clone(),
            algorithm: Algorithm::Pla,
            chain: ChainConfig::new(0.1, 50, 300, 3, InitSpec::ProxPushforward).with_thinning(10),
            out: out("sample.csv"),
            chart: true,
        }),
        Experiment::BiasSweep(BiasSweepConfig {
            eigs: vec![1.0, 0.5],
            eps_grid: EpsGrid::Spec("0.01:1.5:log6".into()),
            empirical: Some(EmpiricalSpec { chains: 300, steps: Some(60), seed: 4, groups: 10 }),
            out: out("bias.csv"),
            chart: true,
        }),
        Experiment::BoundCheck(BoundCheckConfig {
            alpha: 0.5,
            l: 2.0,
            m: 0.3,
            n: 3,
            delta: None,
            eps_grid: Some(EpsGrid::List(vec![0.001, 0.005])),
            steps: 200,
            init_var: Some(3.0),
            stride: 10,
            out: out("bound.csv"),
            chart: true,
        }),
        Experiment::SdeVerify(SdeVerifyConfig {
            target: pq.clone(),
            t_end: 0.05,
            substeps: vec![50, 100],
            paths: 6,
            seed: 5,
            x0: None,
            integrator: Integrator::EulerMaruyama,
            out: out("sde.csv"),
            chart: true,
        }),
        Experiment::ProxBench(ProxBenchConfig {
            target: gauss,
            eps: 0.3,
            points: 200,
            radius: 4.0,
            seed: 6,
            solvers: vec![ProxSolver::Newton, ProxSolver::GradientDescent],
            tol: 1e-10,
            max_iter: 10_000,
            out: out("prox.csv"),
        }),
    ]
    .into_iter()
    .map(ConfigFile::new)
    .collect()
}

/// Runs the binary on `cfg` and returns the main CSV plus any fit table.
fn run_binary(cfg: &ConfigFile, dir: &Path, threads: &str, chart: bool) -> Result<Vec<Vec<u8>>, String> {
    let mut cfg = cfg.clone();
    let out = match &mut cfg.experiment {
        Experiment::Sample(c) => {
            c.chart = chart;
            c.out.clone()
        }
        Experiment::BiasSweep(c) => {
            c.chart = chart;
            c.out.clone()
        }
        Experiment::BoundCheck(c) => {
            c.chart = chart;
            c.out.clone()
        }
        Experiment::SdeVerify(c) => {
            c.chart = chart;
            c.out.clone()
        }
        Experiment::ProxBench(c) => c.out.clone(),
    };
    let path = dir.join(format!("{}.json", cfg.experiment.name()));
    std::fs::write(&path, cfg.to_json()).map_err(|e| e.to_string())?;
    let status = Command::new(env!("CARGO_BIN_EXE_pla"))
        .arg(cfg.experiment.name())
        .arg("--config")
        .arg(&path)
        .env("PLA_THREADS", threads)
        .output()
        .map_err(|e| e.to_string())?;
    if !status.status.success() {
        return Err(format!("{} exited with {}: {}", cfg.experiment.name(), status.status, String::from_utf8_lossy(&status.stderr)));
    }
    let mut files = vec![std::fs::read(&out).map_err(|e| e.to_string())?];
    if let Ok(fit) = std::fs::read(out.with_extension("fit.csv")) {
        files.push(fit);
    }
    Ok(files)
}

fn a12() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut mismatches = Vec::new();
    let configs = a12_configs(dir.path());
    for cfg in &configs {
        let name = cfg.experiment.name();
        let runs = [("1", true), ("2", false), ("1", false)].map(|(t, c)| run_binary(cfg, dir.path(), t, c));
        match runs {
            [Ok(a), Ok(b), Ok(c)] => {
                if a != b || a != c {
                    mismatches.push(name.to_string());
                }
            }
            [a, b, c] => {
                for e in [a, b, c].into_iter().filter_map(Result::err) {
                    mismatches.push(e);
                }
            }
        }
    }
    Outcome::new(
        mismatches.is_empty(),
        if mismatches.is_empty() {
            format!("{} subcommands byte-identical across reruns, thread counts and chart toggles", configs.len())
        } else {
            format!("differences: {}", mismatches.join("; "))
        },
    )
}

// ----------------------------------------------------------------

fn main() {
    let filter: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let criteria = [
        Criterion { id: "A1", title: "Gaussian limit variance", limit: Duration::from_secs(10), run: a1 },
        Criterion { id: "A2", title: "KL bias identity", limit: Duration::from_secs(1), run: a2 },
        Criterion { id: "A3", title: "bias ordering", limit: Duration::from_secs(1), run: a3 },
        Criterion { id: "A4", title: "scaling exponent", limit: Duration::from_secs(1), run: a4 },
        Criterion { id: "A5", title: "convergence bound dominance", limit: Duration::from_secs(5), run: a5 },
        Criterion { id: "A6", title: "Renyi bias", limit: Duration::from_secs(1), run: a6 },
        Criterion { id: "A7", title: "prox correctness", limit: Duration::from_secs(2), run: a7 },
        Criterion { id: "A8", title: "interpolation envelope", limit: Duration::from_secs(5), run: a8 },
        Criterion { id: "A9", title: "SDE representation", limit: Duration::from_secs(30), run: a9 },
        Criterion { id: "A10", title: "non-Gaussian convergence", limit: Duration::from_secs(60), run: a10 },
        Criterion { id: "A11", title: "budget self-consistency", limit: Duration::from_secs(1), run: a11 },
        Criterion { id: "A12", title: "reproducibility", limit: Duration::from_secs(10), run: a12 },
    ];
    let mut unexpected = Vec::new();
    for c in criteria.iter().filter(|c| filter.as_deref().is_none_or(|f| c.id == f)) {
        let start = Instant::now();
        let out = (c.run)();
        let elapsed = start.elapsed();
        let in_time = elapsed <= c.limit;
        let pass = out.pass && in_time;
        let known = KNOWN_UNATTAINABLE.iter().find(|(id, _)| *id == c.id);
        println!(
            "{} {:<4} {:<28} {:>7.2}s (limit {}s{}) | {}",
            if pass { "PASS" } else { "FAIL" },
            c.id,
            c.title,
            elapsed.as_secs_f64(),
            c.limit.as_secs(),
            if in_time { "" } else { ", exceeded" },
            out.detail
        );
        for line in &out.info {
            println!("     {:<4} info: {line}", "");
        }
        match (pass, known) {
            (false, Some((_, why))) => println!("     {:<4} known unattainable: {why}", ""),
            (false, None) => unexpected.push(format!("{} failed", c.id)),
            (true, Some(_)) => unexpected.push(format!("{} passed but is listed as unattainable", c.id)),
            (true, None) => {}
        }
    }
    if !unexpected.is_empty() {
        eprintln!("acceptance: {}", unexpected.join(", "));
        std::process::exit(1);
    }
}
