//! The five subcommands. Each writes its CSV (and optionally an SVG derived
//! from that CSV) and a short human-readable report to `report`.
//!
//! CSV cells never depend on timing or thread count; anything that does
//! (wall-clock numbers) goes to the report only.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use nalgebra::DVector;
use proxlangevin::diagnostics::{bias_scaling_fit, gaussian_fit_kl_with_se, moments, plug_in_bias_floor, ScalingFit};
use proxlangevin::samplers::{run_ensemble, Algorithm, ChainConfig, InitSpec};
use proxlangevin::sde_lab::{verify_sde_on_path, verify_sde_paths, BrownianPath, SdeCheck};
use proxlangevin::targets::{GaussianTarget, Potential};
use proxlangevin::theory::{
    budget_cor2, gaussian_cov_trajectory, gaussian_kl, kl_bias_pla, kl_bias_ula, kl_bound_thm1,
    limit_relative_entropy, one_step_bound, thm1_step_ceiling, BoundParams, Divergence,
};
use proxlangevin::prox::prox_solve;
use proxlangevin::{io as trace_io, rng, ProxConfig};
use rand::Rng;

use crate::chart::{Chart, Series, Table};
use crate::config::{
    BiasSweepConfig, BoundCheckConfig, EmpiricalSpec, Experiment, ProxBenchConfig, SampleConfig, SdeVerifyConfig,
};
use crate::CliError;

/// Halving ratios counted as first-order convergence.
pub const RATIO_BAND: (f64, f64) = (1.6, 2.6);
const DEFAULT_BOUND_GRID: usize = 20;
const HIST_BINS: usize = 60;
const CHART_PATHS: usize = 8;

pub fn run(exp: &Experiment, report: &mut dyn Write) -> Result<(), CliError> {
    match exp {
        Experiment::Sample(c) => cmd_sample(c, report),
        Experiment::BiasSweep(c) => cmd_bias_sweep(c, report),
        Experiment::BoundCheck(c) => cmd_bound_check(c, report),
        Experiment::SdeVerify(c) => cmd_sde_verify(c, report),
        Experiment::ProxBench(c) => cmd_prox_bench(c, report),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn cell(v: f64) -> String {
    v.to_string()
}

fn div_cell(d: Divergence) -> String {
    d.to_string()
}

fn opt_cell(v: Option<f64>) -> String {
    v.map(cell).unwrap_or_default()
}

pub fn cmd_sample(cfg: &SampleConfig, report: &mut dyn Write) -> Result<(), CliError> {
    let target = cfg.target.build()?;
    let trace = run_ensemble(&target, &cfg.chain, cfg.algorithm)?;
    let mut w = create(&cfg.out)?;
    trace_io::write_trace(&trace, &mut w)?;
    w.flush()?;
    drop(w);

    let last = trace.final_iterates();
    writeln!(
        report,
        "sample: {} chains x {} steps of {} -> {}",
        trace.n_chains(),
        cfg.chain.steps,
        cfg.algorithm,
        cfg.out.display()
    )?;
    if last.len() >= 2 {
        let em = moments(&last)?;
        for i in 0..trace.dim {
            writeln!(
                report,
                "  x_{}: mean {:.6} (se {:.2e}), variance {:.6} (se {:.2e})",
                i + 1,
                em.mean[i],
                em.mean_se[i],
                em.cov[(i, i)],
                em.cov_se[(i, i)]
            )?;
        }
    }
    if cfg.chart {
        let path = sample_chart(&cfg.out)?.write_beside(&cfg.out)?;
        writeln!(report, "  chart: {}", path.display())?;
    }
    Ok(())
}

/// Density histogram of `x_1` at the last recorded step.
fn sample_chart(csv_path: &Path) -> Result<Chart, CliError> {
    let table = trace_io::read_trace(File::open(csv_path)?)?;
    let last = table.last_step().unwrap_or(0);
    let xs: Vec<f64> = table.at_step(last).iter().map(|r| r[0]).collect();
    let (lo, hi) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let mut points = Vec::new();
    if hi > lo {
        let width = (hi - lo) / HIST_BINS as f64;
        let mut counts = vec![0usize; HIST_BINS];
        for x in &xs {
            counts[(((x - lo) / width) as usize).min(HIST_BINS - 1)] += 1;
        }
        let norm = xs.len() as f64 * width;
        points = counts.iter().enumerate().map(|(b, &c)| (lo + (b as f64 + 0.5) * width, c as f64 / norm)).collect();
    }
    Ok(Chart {
        title: format!("x_1 at step {last}"),
        x_label: "x_1".into(),
        y_label: "density".into(),
        log_x: false,
        log_y: false,
        series: vec![Series { name: "histogram".into(), points }],
    })
}

/// Empirical bias `(kl, se)` of one algorithm at one step, or `None` where the
/// chain has no stationary law.
fn empirical_bias(
    target: &GaussianTarget,
    spec: &EmpiricalSpec,
    eps: f64,
    algorithm: Algorithm,
) -> Result<Option<(f64, f64)>, CliError> {
    if algorithm == Algorithm::Ula && eps >= 2.0 * target.eigenvalues().iter().copied().fold(f64::INFINITY, f64::min) {
        return Ok(None);
    }
    let max_eig = target.eigenvalues().iter().copied().fold(0.0, f64::max);
    let steps = spec.steps.unwrap_or_else(|| (10.0 * max_eig / eps).ceil() as usize);
    let chain = ChainConfig::new(eps, steps, spec.chains, spec.seed, InitSpec::GaussianAtStationary).with_thinning(steps.max(1));
    let trace = run_ensemble(target, &chain, algorithm)?;
    Ok(Some(gaussian_fit_kl_with_se(&trace.final_iterates(), target, spec.groups)?))
}

pub const BIAS_COLUMNS: [&str; 9] = [
    "eps",
    "pla_kl_theory",
    "pla_kl_forward",
    "pla_kl_empirical",
    "pla_se",
    "ula_kl_theory",
    "ula_kl_forward",
    "ula_kl_empirical",
    "ula_se",
];

pub fn cmd_bias_sweep(cfg: &BiasSweepConfig, report: &mut dyn Write) -> Result<(), CliError> {
    let grid = cfg.eps_grid.values()?;
    let target = GaussianTarget::diagonal(&cfg.eigs)?;
    let mut w = csv::Writer::from_writer(create(&cfg.out)?);
    w.write_record(BIAS_COLUMNS)?;
    for &eps in &grid {
        let mut row = vec![cell(eps)];
        for algorithm in [Algorithm::Pla, Algorithm::Ula] {
            let theory = match algorithm {
                Algorithm::Pla => Divergence::Finite(kl_bias_pla(&cfg.eigs, eps)?),
                Algorithm::Ula => kl_bias_ula(&cfg.eigs, eps)?,
            };
            row.push(div_cell(theory));
            row.push(div_cell(limit_relative_entropy(algorithm, &cfg.eigs, eps)?));
            match &cfg.empirical {
                None => row.extend([String::new(), String::new()]),
                Some(spec) => match empirical_bias(&target, spec, eps, algorithm)? {
                    Some((kl, se)) => row.extend([cell(kl), cell(se)]),
                    None => row.extend([div_cell(Divergence::Infinite), String::new()]),
                },
            }
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    drop(w);

    writeln!(report, "bias-sweep: {} step sizes -> {}", grid.len(), cfg.out.display())?;
    if let Some(spec) = &cfg.empirical {
        writeln!(
            report,
            "  empirical columns carry a plug-in floor of about {:.2e} at {} chains",
            plug_in_bias_floor(cfg.eigs.len(), spec.chains),
            spec.chains
        )?;
    }
    let table = Table::read(&cfg.out)?;
    let fit_path = cfg.out.with_extension("fit.csv");
    let mut fw = csv::Writer::from_writer(create(&fit_path)?);
    fw.write_record(["column", "points", "slope", "intercept", "r_squared", "reliable"])?;
    for column in &BIAS_COLUMNS[1..] {
        if column.ends_with("_se") {
            continue;
        }
        let col = table.column(column).expect("own header");
        let (eps, bias): (Vec<f64>, Vec<f64>) = (0..table.rows.len())
            .filter_map(|r| Some((table.number(r, 0)?, table.number(r, col)?)))
            .filter(|(_, b)| b.is_finite() && *b > 0.0)
            .unzip();
        if eps.len() < 4 {
            continue;
        }
        let fit: ScalingFit = bias_scaling_fit(&eps, &bias)?;
        fw.write_record([
            column.to_string(),
            eps.len().to_string(),
            cell(fit.slope),
            cell(fit.intercept),
            cell(fit.r_squared),
            fit.reliable.to_string(),
        ])?;
        writeln!(
            report,
            "  {column}: slope {:.4}, R^2 {:.4}{}",
            fit.slope,
            fit.r_squared,
            if fit.reliable { "" } else { " (unreliable)" }
        )?;
    }
    fw.flush()?;
    writeln!(report, "  fits: {}", fit_path.display())?;
    if cfg.chart {
        let path = bias_chart(&table).write_beside(&cfg.out)?;
        writeln!(report, "  chart: {}", path.display())?;
    }
    Ok(())
}

fn bias_chart(table: &Table) -> Chart {
    let series = BIAS_COLUMNS[1..]
        .iter()
        .filter(|c| !c.ends_with("_se"))
        .filter_map(|name| {
            let col = table.column(name)?;
            let points: Vec<(f64, f64)> =
                (0..table.rows.len()).filter_map(|r| Some((table.number(r, 0)?, table.number(r, col)?))).collect();
            (!points.is_empty()).then(|| Series { name: name.to_string(), points })
        })
        .collect();
    Chart {
        title: "stationary bias in KL".into(),
        x_label: "step size".into(),
        y_label: "KL".into(),
        log_x: true,
        log_y: true,
        series,
    }
}

/// Covariance spectrum of the Gaussian used as the exact-law witness: spread
/// evenly between `1/L` and `1/α`, so its Hessian bound is `L` and its LSI
/// constant is `α`. A single dimension uses `1/α`.
pub fn bound_check_spectrum(alpha: f64, l: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0 / alpha];
    }
    (0..n).map(|i| 1.0 / l + (1.0 / alpha - 1.0 / l) * i as f64 / (n - 1) as f64).collect()
}

pub fn cmd_bound_check(cfg: &BoundCheckConfig, report: &mut dyn Write) -> Result<(), CliError> {
    let (alpha, l, m, n) = (cfg.alpha, cfg.l, cfg.m, cfg.n);
    if !(alpha > 0.0 && l >= alpha && l.is_finite()) || n == 0 || cfg.stride == 0 {
        return Err(CliError::Config(format!("need 0 < alpha <= L, n >= 1 and stride >= 1 (alpha={alpha}, L={l}, n={n})")));
    }
    let eigs = bound_check_spectrum(alpha, l, n);
    let init_var = cfg.init_var.unwrap_or(4.0 / alpha);
    if !(init_var > 0.0) {
        return Err(CliError::Config(format!("init_var {init_var} must be positive")));
    }
    let initial = vec![init_var; n];
    let h0 = gaussian_kl(&initial, &eigs)?;

    let runs: Vec<(f64, usize)> = match (cfg.delta, &cfg.eps_grid) {
        (Some(delta), _) => {
            let b = budget_cor2(alpha, l, m, n, delta, h0)?;
            writeln!(report, "bound-check budget: delta {delta} -> eps {:.6e}, k {}{}", b.eps, b.k, if b.capped { " (capped)" } else { "" })?;
            vec![(b.eps, b.k)]
        }
        (None, Some(g)) => g.values()?.into_iter().map(|e| (e, cfg.steps)).collect(),
        (None, None) => {
            let top = thm1_step_ceiling(alpha, l, m);
            let count = DEFAULT_BOUND_GRID;
            (1..=count).map(|i| (top * i as f64 / count as f64, cfg.steps)).collect()
        }
    };

    let mut w = csv::Writer::from_writer(create(&cfg.out)?);
    w.write_record(["eps", "k", "exact_kl", "bound", "slack", "one_step_slack"])?;
    let mut worst = f64::INFINITY;
    let mut worst_one_step = f64::INFINITY;
    for &(eps, k_max) in &runs {
        let traj = gaussian_cov_trajectory(&eigs, eps, k_max, &initial)?;
        let mut prev: Option<f64> = None;
        for (k, cov) in traj.iter().enumerate() {
            let exact = gaussian_kl(cov, &eigs)?;
            let bound = kl_bound_thm1(&BoundParams { alpha, l, m, n, eps, k, h0 })?;
            let one_step = prev.map(|h| one_step_bound(h, alpha, l, m, n, eps) - exact);
            prev = Some(exact);
            worst = worst.min(bound - exact);
            if let Some(s) = one_step {
                worst_one_step = worst_one_step.min(s);
            }
            if k % cfg.stride == 0 || k == k_max {
                w.write_record([cell(eps), k.to_string(), cell(exact), cell(bound), cell(bound - exact), opt_cell(one_step)])?;
            }
        }
    }
    w.flush()?;
    writeln!(
        report,
        "bound-check: {} step size(s), H0 = {h0:.6}, min slack {worst:.3e}, min one-step slack {} -> {}",
        runs.len(),
        if worst_one_step.is_finite() { format!("{worst_one_step:.3e}") } else { "n/a".into() },
        cfg.out.display()
    )?;
    if cfg.chart {
        let path = bound_chart(&Table::read(&cfg.out)?).write_beside(&cfg.out)?;
        writeln!(report, "  chart: {}", path.display())?;
    }
    Ok(())
}

/// Exact KL and bound against `k` for the smallest and largest step.
fn bound_chart(table: &Table) -> Chart {
    let eps: Vec<f64> = (0..table.rows.len()).filter_map(|r| table.number(r, 0)).collect();
    let (lo, hi) = eps.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &e| (a.min(e), b.max(e)));
    let mut series = Vec::new();
    for e in if lo == hi { vec![lo] } else { vec![lo, hi] } {
        for (col, label) in [(2, "exact"), (3, "bound")] {
            let points = (0..table.rows.len())
                .filter(|&r| table.number(r, 0) == Some(e))
                .filter_map(|r| Some((table.number(r, 1)?, table.number(r, col)?)))
                .collect();
            series.push(Series { name: format!("{label} eps={e:.3e}"), points });
        }
    }
    Chart {
        title: "relative entropy vs iteration".into(),
        x_label: "k".into(),
        y_label: "KL".into(),
        log_x: false,
        log_y: true,
        series,
    }
}

fn sde_rows(label: &str, check: &SdeCheck) -> Vec<[String; 4]> {
    check
        .substeps
        .iter()
        .zip(&check.errors)
        .enumerate()
        .map(|(i, (s, e))| {
            let ratio = if i == 0 { String::new() } else { cell(check.errors[i - 1] / e) };
            [label.to_string(), s.to_string(), cell(*e), ratio]
        })
        .collect()
}

/// A path passes when its errors fall strictly and every halving ratio lies in
/// [`RATIO_BAND`].
pub fn path_passes(check: &SdeCheck) -> bool {
    check.monotone() && check.ratios().iter().all(|r| (RATIO_BAND.0..=RATIO_BAND.1).contains(r))
}

pub fn cmd_sde_verify(cfg: &SdeVerifyConfig, report: &mut dyn Write) -> Result<(), CliError> {
    let target = cfg.target.build()?;
    let x0 = DVector::from_vec(cfg.x0.clone().unwrap_or_else(|| vec![1.0; target.dim()]));
    if x0.len() != target.dim() {
        return Err(proxlangevin::Error::DimensionMismatch { expected: target.dim(), got: x0.len() }.into());
    }
    let fine = cfg.substeps.iter().copied().max().unwrap_or(1);
    let zero = verify_sde_on_path(&target, &x0, &BrownianPath::zero(target.dim(), cfg.t_end, fine), &cfg.substeps, cfg.integrator)?;
    let checks = verify_sde_paths(&target, &x0, cfg.t_end, &cfg.substeps, cfg.paths, cfg.seed, cfg.integrator)?;

    let mut w = csv::Writer::from_writer(create(&cfg.out)?);
    w.write_record(["path", "substeps", "error", "ratio"])?;
    for row in sde_rows("zero", &zero) {
        w.write_record(&row)?;
    }
    for (i, c) in checks.iter().enumerate() {
        for row in sde_rows(&i.to_string(), c) {
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    let passing = checks.iter().filter(|c| path_passes(c)).count();
    writeln!(
        report,
        "sde-verify ({}): {passing}/{} paths monotone with ratios in [{}, {}]; zero-noise errors {:?} -> {}",
        cfg.integrator,
        checks.len(),
        RATIO_BAND.0,
        RATIO_BAND.1,
        zero.errors,
        cfg.out.display()
    )?;
    if cfg.chart {
        let path = sde_chart(&Table::read(&cfg.out)?).write_beside(&cfg.out)?;
        writeln!(report, "  chart: {}", path.display())?;
    }
    Ok(())
}

fn sde_chart(table: &Table) -> Chart {
    let mut labels: Vec<&str> = Vec::new();
    for row in &table.rows {
        if !labels.contains(&row[0].as_str()) && labels.len() < CHART_PATHS {
            labels.push(&row[0]);
        }
    }
    let series = labels
        .iter()
        .map(|label| Series {
            name: format!("path {label}"),
            points: (0..table.rows.len())
                .filter(|&r| table.rows[r][0] == *label)
                .filter_map(|r| Some((table.number(r, 1)?, table.number(r, 2)?)))
                .collect(),
        })
        .collect();
    Chart {
        title: "pathwise error vs substeps".into(),
        x_label: "substeps".into(),
        y_label: "max error".into(),
        log_x: true,
        log_y: true,
        series,
    }
}

pub fn cmd_prox_bench(cfg: &ProxBenchConfig, report: &mut dyn Write) -> Result<(), CliError> {
    let target = cfg.target.build()?;
    if !(cfg.radius >= 0.0 && cfg.radius.is_finite()) || cfg.solvers.is_empty() {
        return Err(CliError::Config("prox-bench needs a finite radius and at least one solver".into()));
    }
    let mut rng = rng::stream(cfg.seed, 0);
    let ys: Vec<DVector<f64>> = (0..cfg.points)
        .map(|_| DVector::from_fn(target.dim(), |_, _| rng.random_range(-1.0..=1.0) * cfg.radius))
        .collect();

    let mut w = csv::Writer::from_writer(create(&cfg.out)?);
    w.write_record(["solver", "point", "iterations", "residual", "converged"])?;
    writeln!(report, "prox-bench: {} points, eps {}", cfg.points, cfg.eps)?;
    for &solver in &cfg.solvers {
        let prox = ProxConfig { tol: cfg.tol, max_iter: cfg.max_iter, solver, ..ProxConfig::default() };
        let start = Instant::now();
        let outcomes = ys.iter().map(|y| prox_solve(&target, y, cfg.eps, &prox)).collect::<Result<Vec<_>, _>>()?;
        let elapsed = start.elapsed();
        let mut total_iter = 0;
        let mut failures = 0;
        for (i, o) in outcomes.iter().enumerate() {
            total_iter += o.iterations;
            failures += usize::from(!o.converged);
            w.write_record([solver.to_string(), i.to_string(), o.iterations.to_string(), cell(o.residual), o.converged.to_string()])?;
        }
        let per_call = elapsed.as_secs_f64() / cfg.points.max(1) as f64;
        writeln!(
            report,
            "  {solver}: {:.3} us/call, {:.2} iterations/call, {failures} not converged",
            per_call * 1e6,
            total_iter as f64 / cfg.points.max(1) as f64
        )?;
    }
    w.flush()?;
    writeln!(report, "  -> {}", cfg.out.display())?;
    Ok(())
}
