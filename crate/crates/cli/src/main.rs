use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use proxlangevin::samplers::{Algorithm, ChainConfig, InitSpec};
use proxlangevin::sde_lab::Integrator;
use proxlangevin::{ProxConfig, ProxSolver, TargetSpec};
use proxlangevin_cli::config::{
    BiasSweepConfig, BoundCheckConfig, ConfigFile, EmpiricalSpec, EpsGrid, Experiment, ProxBenchConfig, SampleConfig,
    SdeVerifyConfig,
};
use proxlangevin_cli::{commands, configure_threads, CliError};

/// Proximal and unadjusted Langevin experiments.
///
/// Every subcommand takes either flags or `--config file.json`; a config file
/// overrides all flags. Exit codes: 0 success, 2 configuration error,
/// 3 numerical failure. PLA_THREADS caps the worker count.
#[derive(Parser)]
#[command(name = "pla", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an ensemble and write its trace.
    Sample(SampleArgs),
    /// Tabulate stationary KL bias of PLA and ULA on a Gaussian over a step grid.
    BiasSweep(BiasSweepArgs),
    /// Compare exact KL of the Gaussian chain law with the convergence bound.
    BoundCheck(BoundCheckArgs),
    /// Check the SDE representation of one proximal step pathwise.
    SdeVerify(SdeVerifyArgs),
    /// Iteration counts and timing of the proximal solvers.
    ProxBench(ProxBenchArgs),
}

#[derive(Args)]
struct Common {
    /// JSON experiment file; overrides every other flag.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    common: Common,
    /// Target as inline JSON or a path to a JSON file.
    #[arg(long)]
    target: Option<String>,
    #[arg(long, visible_alias = "algo", default_value = "pla")]
    algorithm: Algorithm,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, default_value_t = 100)]
    steps: usize,
    #[arg(long, default_value_t = 1000)]
    chains: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// stationary | pushforward | point (with --x0)
    #[arg(long, default_value = "stationary")]
    init: String,
    /// Comma-separated starting point for `--init point`.
    #[arg(long, value_delimiter = ',')]
    x0: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1)]
    thinning: usize,
    #[arg(long)]
    prox_tol: Option<f64>,
    #[arg(long)]
    prox_solver: Option<ProxSolver>,
    #[arg(long)]
    prox_max_iter: Option<usize>,
    /// Also write an SVG next to the CSV.
    #[arg(long)]
    chart: bool,
}

#[derive(Args)]
struct BiasSweepArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated covariance eigenvalues.
    #[arg(long, value_delimiter = ',')]
    eigs: Option<Vec<f64>>,
    /// `a,b,c`, `lo:hi:logN` or `lo:hi:linN`.
    #[arg(long)]
    eps_grid: Option<String>,
    /// Enable the empirical columns with this many chains.
    #[arg(long)]
    chains: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    groups: usize,
    #[arg(long)]
    chart: bool,
}

#[derive(Args)]
struct BoundCheckArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long = "L")]
    l: Option<f64>,
    #[arg(long = "M", default_value_t = 0.0)]
    m: f64,
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Accuracy target; picks step and horizon from the budget rule.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    eps_grid: Option<String>,
    #[arg(long, default_value_t = 500)]
    steps: usize,
    #[arg(long)]
    init_var: Option<f64>,
    #[arg(long, default_value_t = 1)]
    stride: usize,
    #[arg(long)]
    chart: bool,
}

#[derive(Args)]
struct SdeVerifyArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    target: Option<String>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long, value_delimiter = ',', default_value = "100,200,400")]
    substeps: Vec<usize>,
    #[arg(long, default_value_t = 32)]
    paths: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_delimiter = ',')]
    x0: Option<Vec<f64>>,
    /// em | milstein
    #[arg(long, default_value = "em")]
    integrator: Integrator,
    #[arg(long)]
    chart: bool,
}

#[derive(Args)]
struct ProxBenchArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    target: Option<String>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    points: usize,
    #[arg(long, default_value_t = 5.0)]
    radius: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_delimiter = ',')]
    solvers: Option<Vec<ProxSolver>>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
}

fn need<T>(v: Option<T>, flag: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Config(format!("missing {flag} (or pass --config)")))
}

fn target_arg(raw: Option<String>) -> Result<TargetSpec, CliError> {
    let raw = need(raw, "--target")?;
    let text = if raw.trim_start().starts_with('{') {
        raw
    } else {
        std::fs::read_to_string(&raw).map_err(|e| CliError::Config(format!("cannot read target {raw}: {e}")))?
    };
    TargetSpec::from_json(&text).map_err(|e| CliError::Config(format!("target: {e}")))
}

fn from_config(path: &std::path::Path, expected: &str) -> Result<Experiment, CliError> {
    let exp = ConfigFile::load(path)?.experiment;
    if exp.name() != expected {
        return Err(CliError::Config(format!("config describes '{}', not '{expected}'", exp.name())));
    }
    Ok(exp)
}

fn experiment(cmd: Command) -> Result<Experiment, CliError> {
    Ok(match cmd {
        Command::Sample(a) => match &a.common.config {
            Some(p) => from_config(p, "sample")?,
            None => {
                let init = match a.init.as_str() {
                    "stationary" => InitSpec::GaussianAtStationary,
                    "pushforward" => InitSpec::ProxPushforward,
                    "point" => InitSpec::PointMass { x0: need(a.x0, "--x0")? },
                    other => return Err(CliError::Config(format!("unknown --init '{other}'"))),
                };
                let mut prox = ProxConfig::default();
                if let Some(t) = a.prox_tol {
                    prox.tol = t;
                }
                if let Some(s) = a.prox_solver {
                    prox.solver = s;
                }
                if let Some(m) = a.prox_max_iter {
                    prox.max_iter = m;
                }
                let chain =
                    ChainConfig::new(need(a.eps, "--eps")?, a.steps, a.chains, a.seed, init).with_thinning(a.thinning).with_prox(prox);
                Experiment::Sample(SampleConfig {
                    target: target_arg(a.target)?,
                    algorithm: a.algorithm,
                    chain,
                    out: need(a.common.out, "--out")?,
                    chart: a.chart,
                })
            }
        },
        Command::BiasSweep(a) => match &a.common.config {
            Some(p) => from_config(p, "bias-sweep")?,
            None => Experiment::BiasSweep(BiasSweepConfig {
                eigs: need(a.eigs, "--eigs")?,
                eps_grid: EpsGrid::Spec(need(a.eps_grid, "--eps-grid")?),
                empirical: a.chains.map(|chains| EmpiricalSpec { chains, steps: a.steps, seed: a.seed, groups: a.groups }),
                out: need(a.common.out, "--out")?,
                chart: a.chart,
            }),
        },
        Command::BoundCheck(a) => match &a.common.config {
            Some(p) => from_config(p, "bound-check")?,
            None => Experiment::BoundCheck(BoundCheckConfig {
                alpha: need(a.alpha, "--alpha")?,
                l: need(a.l, "--L")?,
                m: a.m,
                n: a.n,
                delta: a.delta,
                eps_grid: a.eps_grid.map(EpsGrid::Spec),
                steps: a.steps,
                init_var: a.init_var,
                stride: a.stride,
                out: need(a.common.out, "--out")?,
                chart: a.chart,
            }),
        },
        Command::SdeVerify(a) => match &a.common.config {
            Some(p) => from_config(p, "sde-verify")?,
            None => Experiment::SdeVerify(SdeVerifyConfig {
                target: target_arg(a.target)?,
                t_end: need(a.t_end, "--t-end")?,
                substeps: a.substeps,
                paths: a.paths,
                seed: a.seed,
                x0: a.x0,
                integrator: a.integrator,
                out: need(a.common.out, "--out")?,
                chart: a.chart,
            }),
        },
        Command::ProxBench(a) => match &a.common.config {
            Some(p) => from_config(p, "prox-bench")?,
            None => {
                let d = ProxConfig::default();
                Experiment::ProxBench(ProxBenchConfig {
                    target: target_arg(a.target)?,
                    eps: need(a.eps, "--eps")?,
                    points: a.points,
                    radius: a.radius,
                    seed: a.seed,
                    solvers: a.solvers.unwrap_or_else(|| vec![ProxSolver::Newton, ProxSolver::GradientDescent]),
                    tol: a.tol.unwrap_or(d.tol),
                    max_iter: a.max_iter.unwrap_or(d.max_iter),
                    out: need(a.common.out, "--out")?,
                })
            }
        },
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads()
        .and_then(|()| experiment(cli.command))
        .and_then(|exp| commands::run(&exp, &mut std::io::stdout().lock()));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
