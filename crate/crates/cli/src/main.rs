//! `bnlab`: solve, sweep and verify the Brezis–Nirenberg problem on the
//! unit ball.
//!
//! Exit codes: 0 success, 1 verification failure, 2 invalid configuration,
//! 3 unreachable target, 4 numerical or I/O failure.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use bnlab::asymptotics::{self, FitReport, SweepFailure};
use bnlab::checks::{verify_suite, VerifyOptions};
use bnlab::decomposition::{fit_decomposition, perturbation_order_fit};
use bnlab::linearization::{self, NondegeneracyCertificate};
use bnlab::radial::{solve_eps_tilde, solve_for_eps, RadialSolution, ShootOptions};
use bnlab::{ConstantSet, Params};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use config::RunConfig;

#[derive(Debug, Error)]
pub enum Failure {
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Unreachable(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o failure: {0}")]
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verification(_) => 1,
            Failure::Config(_) => 2,
            Failure::Unreachable(_) => 3,
            Failure::Numerical(_) | Failure::Io(_) => 4,
        }
    }
}

impl From<bnlab::Error> for Failure {
    fn from(e: bnlab::Error) -> Self {
        use bnlab::Error as E;
        match e {
            E::Regime(_) | E::Domain(_) => Failure::Config(e.to_string()),
            E::Unreachable { .. } => Failure::Unreachable(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "bnlab", version, about = "Radial Brezis–Nirenberg solver and verification lab")]
struct Cli {
    /// JSON configuration file; flags take precedence over its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for sweeps (default: available parallelism).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default, Clone)]
struct Problem {
    /// Dimension N (default 4).
    #[arg(long)]
    n: Option<usize>,
    /// Subcritical exponent q (default 3).
    #[arg(long)]
    q: Option<f64>,
    /// JSON output path (default: stdout).
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args, Default, Clone)]
struct Target {
    /// Target ε on the unit ball.
    #[arg(long)]
    eps: Option<f64>,
    /// Shooting parameter ε̃ of the height-one problem.
    #[arg(long)]
    eps_tilde: Option<f64>,
}

#[derive(Args, Default, Clone)]
struct Grid {
    /// Largest ε̃ of the logarithmic grid.
    #[arg(long)]
    from: Option<f64>,
    /// Smallest ε̃ of the logarithmic grid.
    #[arg(long)]
    to: Option<f64>,
    /// Number of grid points.
    #[arg(long)]
    points: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form constants for (N, q).
    Constants {
        #[command(flatten)]
        problem: Problem,
    },
    /// One solution: profile CSV and diagnostics JSON.
    Solve {
        #[command(flatten)]
        problem: Problem,
        #[command(flatten)]
        target: Target,
        /// Profile CSV path.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Rows in the profile CSV.
        #[arg(long)]
        profile_points: Option<usize>,
        /// Relative accuracy of ε when solving for a target ε.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Sweep over ε̃: records CSV and fits JSON.
    Sweep {
        #[command(flatten)]
        problem: Problem,
        #[command(flatten)]
        grid: Grid,
        /// Records CSV path.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Highest spherical-harmonic degree in the certificates.
        #[arg(long)]
        ell_max: Option<usize>,
        /// Certificate threshold on the distance of the spectrum to zero.
        #[arg(long)]
        spectrum_tol: Option<f64>,
    },
    /// Identity suite; exit 1 if any check fails.
    Verify {
        #[command(flatten)]
        problem: Problem,
        /// Scale the Green's function constant by 1.01.
        #[arg(long)]
        inject_green_fault: bool,
        /// Sphere quadrature order.
        #[arg(long)]
        quad_order: Option<usize>,
    },
    /// Bubble-plus-perturbation decomposition of one solution.
    Decompose {
        #[command(flatten)]
        problem: Problem,
        #[command(flatten)]
        target: Target,
    },
    /// Nondegeneracy certificate of one solution; exit 1 if it fails.
    Spectrum {
        #[command(flatten)]
        problem: Problem,
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        ell_max: Option<usize>,
        #[arg(long)]
        spectrum_tol: Option<f64>,
        /// Cells of the coarsest grid.
        #[arg(long)]
        n_grid: Option<usize>,
    },
    /// (μ, ε) along the solution branch.
    Branch {
        #[command(flatten)]
        problem: Problem,
        #[command(flatten)]
        grid: Grid,
    },
}

impl Command {
    /// The flag values as a config layer.
    fn flags(&self, jobs: Option<usize>) -> RunConfig {
        let mut c = RunConfig {
            jobs,
            ..RunConfig::default()
        };
        let problem = |c: &mut RunConfig, p: &Problem| {
            c.n = p.n;
            c.q = p.q;
            c.json = p.json.clone();
        };
        let target = |c: &mut RunConfig, t: &Target| {
            c.eps = t.eps;
            c.eps_tilde = t.eps_tilde;
        };
        let grid = |c: &mut RunConfig, g: &Grid| {
            c.eps_tilde_from = g.from;
            c.eps_tilde_to = g.to;
            c.points = g.points;
        };
        match self {
            Command::Constants { problem: p } => problem(&mut c, p),
            Command::Solve {
                problem: p,
                target: t,
                csv,
                profile_points,
                tol,
            } => {
                problem(&mut c, p);
                target(&mut c, t);
                c.csv = csv.clone();
                c.profile_points = *profile_points;
                c.tol = *tol;
            }
            Command::Sweep {
                problem: p,
                grid: g,
                csv,
                ell_max,
                spectrum_tol,
            } => {
                problem(&mut c, p);
                grid(&mut c, g);
                c.csv = csv.clone();
                c.ell_max = *ell_max;
                c.spectrum_tol = *spectrum_tol;
            }
            Command::Verify {
                problem: p,
                inject_green_fault,
                quad_order,
            } => {
                problem(&mut c, p);
                c.quad_order = *quad_order;
                if *inject_green_fault {
                    c.green_fault = Some(1.01);
                }
            }
            Command::Decompose { problem: p, target: t } => {
                problem(&mut c, p);
                target(&mut c, t);
            }
            Command::Spectrum {
                problem: p,
                target: t,
                ell_max,
                spectrum_tol,
                n_grid,
            } => {
                problem(&mut c, p);
                target(&mut c, t);
                c.ell_max = *ell_max;
                c.spectrum_tol = *spectrum_tol;
                c.n_grid = *n_grid;
            }
            Command::Branch { problem: p, grid: g } => {
                problem(&mut c, p);
                grid(&mut c, g);
            }
        }
        c
    }
}

fn params(cfg: &RunConfig) -> Result<Params, Failure> {
    Ok(Params::new(cfg.n.unwrap_or(4), cfg.q.unwrap_or(3.0))?)
}

fn regime_params(cfg: &RunConfig) -> Result<Params, Failure> {
    let p = params(cfg)?;
    p.require_regime()?;
    Ok(p)
}

fn solution(p: &Params, cfg: &RunConfig) -> Result<RadialSolution, Failure> {
    match (cfg.eps, cfg.eps_tilde) {
        (Some(e), None) => Ok(solve_for_eps(p, e, cfg.tol.unwrap_or(1e-10))?),
        (None, Some(et)) => Ok(solve_eps_tilde(p, et, &ShootOptions::default())?),
        _ => Err(Failure::Config("give exactly one of --eps and --eps-tilde".into())),
    }
}

fn grid(cfg: &RunConfig, default: Vec<f64>) -> Result<Vec<f64>, Failure> {
    if cfg.eps_tilde_from.is_none() && cfg.eps_tilde_to.is_none() && cfg.points.is_none() {
        return Ok(default);
    }
    let from = cfg.eps_tilde_from.unwrap_or(default[0]);
    let to = cfg.eps_tilde_to.unwrap_or(default[default.len() - 1]);
    let points = cfg.points.unwrap_or(default.len());
    if !(from > to && to > 0.0) || !from.is_finite() {
        return Err(Failure::Config(format!(
            "ε̃ grid needs from > to > 0, got from = {from}, to = {to}"
        )));
    }
    Ok(asymptotics::log_grid(from, to, points))
}

fn jobs(cfg: &RunConfig) -> usize {
    cfg.jobs.unwrap_or(0)
}

#[derive(Serialize)]
struct ConstantsDoc {
    n: usize,
    q: f64,
    #[serde(rename = "alpha_N")]
    alpha_n: f64,
    #[serde(rename = "omega_N")]
    omega_n: f64,
    #[serde(rename = "C_Nq")]
    c_nq: f64,
    #[serde(rename = "alpha_Nq")]
    alpha_nq: f64,
    #[serde(rename = "S_N2")]
    s_n2: f64,
    blowup_target: f64,
}

fn cmd_constants(cfg: &RunConfig) -> Result<(), Failure> {
    let p = regime_params(cfg)?;
    let c = ConstantSet::compute(&p)?;
    let doc = ConstantsDoc {
        n: p.n,
        q: p.q,
        alpha_n: c.alpha_n,
        omega_n: c.omega_n,
        c_nq: c.c_nq,
        alpha_nq: c.alpha_nq,
        s_n2: c.sobolev_sn2,
        blowup_target: asymptotics::blowup_target(&p)?,
    };
    output::emit(cfg.json.as_deref(), &output::json_document(&doc)?)
}

#[derive(Serialize)]
struct SolveDoc<'a> {
    #[serde(flatten)]
    solution: &'a RadialSolution,
    blowup_product: f64,
    sobolev_quotient: f64,
}

fn cmd_solve(cfg: &RunConfig) -> Result<(), Failure> {
    let p = regime_params(cfg)?;
    let sol = solution(&p, cfg)?;
    if let Some(path) = &cfg.csv {
        let points = cfg.profile_points.unwrap_or(1001);
        if points < 2 {
            return Err(Failure::Config("profile_points must be >= 2".into()));
        }
        output::write_file(path, &output::profile_csv(&sol.profile(points)))?;
    }
    let doc = SolveDoc {
        solution: &sol,
        blowup_product: sol.blowup_product(),
        sobolev_quotient: sol.sobolev_quotient(),
    };
    output::emit(cfg.json.as_deref(), &output::json_document(&doc)?)
}

/// A fit, or the reason it could not be made.
#[derive(Serialize)]
#[serde(untagged)]
enum Outcome<T> {
    Ok(T),
    Failed { error: String },
}

impl<T> From<bnlab::Result<T>> for Outcome<T> {
    fn from(r: bnlab::Result<T>) -> Self {
        match r {
            Ok(v) => Outcome::Ok(v),
            Err(e) => Outcome::Failed { error: e.to_string() },
        }
    }
}

#[derive(Serialize)]
struct CertificateEntry {
    eps_tilde: f64,
    eps: f64,
    certificate: Outcome<NondegeneracyCertificate>,
}

#[derive(Serialize)]
struct SweepDoc {
    n: usize,
    q: f64,
    requested_points: usize,
    solved_points: usize,
    success_rate: f64,
    failures: Vec<SweepFailure>,
    energy_strictly_decreasing: bool,
    blowup: Outcome<FitReport>,
    deficit: Outcome<FitReport>,
    decomposition_slope: Outcome<FitReport>,
    boundary_green: Outcome<FitReport>,
    nondegeneracy: Vec<CertificateEntry>,
}

fn cmd_sweep(cfg: &RunConfig) -> Result<(), Failure> {
    let p = regime_params(cfg)?;
    let grid = grid(cfg, asymptotics::default_grid())?;
    if grid.len() < 6 {
        return Err(Failure::Config(format!("a sweep needs >= 6 points, got {}", grid.len())));
    }
    let sw = asymptotics::sweep(&p, &grid, jobs(cfg))?;
    if let Some(path) = &cfg.csv {
        output::write_file(path, &output::sweep_csv(&sw.records))?;
    }
    let decomposition: bnlab::Result<Vec<_>> =
        sw.solutions.iter().map(|s| fit_decomposition(&p, s)).collect();
    let certs = linearization::certificates(
        &p,
        &sw.solutions,
        cfg.ell_max.unwrap_or(4),
        cfg.spectrum_tol.unwrap_or(linearization::DEFAULT_TOL),
        jobs(cfg),
    )?;
    let doc = SweepDoc {
        n: p.n,
        q: p.q,
        requested_points: grid.len(),
        solved_points: sw.records.len(),
        success_rate: sw.success_rate(),
        failures: sw.failures.clone(),
        energy_strictly_decreasing: sw.records.windows(2).all(|w| w[1].s_eps > w[0].s_eps),
        blowup: asymptotics::blowup_rate_fit(&p, &sw.records).into(),
        deficit: asymptotics::deficit_rate_fit(&p, &sw.records).into(),
        decomposition_slope: decomposition.and_then(|d| perturbation_order_fit(&p, &d)).into(),
        boundary_green: asymptotics::boundary_green_limit(&p, &sw.records).into(),
        nondegeneracy: sw
            .records
            .iter()
            .zip(certs)
            .map(|(r, c)| CertificateEntry {
                eps_tilde: r.eps_tilde,
                eps: r.eps,
                certificate: c.into(),
            })
            .collect(),
    };
    output::emit(cfg.json.as_deref(), &output::json_document(&doc)?)?;
    if sw.success_rate() < 0.8 {
        return Err(Failure::Numerical(format!(
            "only {} of {} sweep points solved",
            sw.records.len(),
            grid.len()
        )));
    }
    Ok(())
}

fn cmd_verify(cfg: &RunConfig) -> Result<(), Failure> {
    let p = regime_params(cfg)?;
    let defaults = VerifyOptions::default();
    let opts = VerifyOptions {
        quad_order: cfg.quad_order.unwrap_or(defaults.quad_order),
        green_fault: cfg.green_fault.unwrap_or(defaults.green_fault),
        eps_tilde: cfg.eps_tilde.unwrap_or(defaults.eps_tilde),
    };
    if opts.quad_order < 16 {
        return Err(Failure::Config("quad_order must be >= 16".into()));
    }
    let report = verify_suite(&p, &opts);
    output::emit(cfg.json.as_deref(), &output::json_document(&report)?)?;
    if report.all_pass {
        Ok(())
    } else {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
        Err(Failure::Verification(failed.join(", ")))
    }
}

fn cmd_decompose(cfg: &RunConfig) -> Result<(), Failure> {
    let p = regime_params(cfg)?;
    let sol = solution(&p, cfg)?;
    let d = fit_decomposition(&p, &sol)?;
    output::emit(cfg.json.as_deref(), &output::json_document(&d)?)
}

fn cmd_spectrum(cfg: &RunConfig) -> Result<(), Failure> {
    let p = regime_params(cfg)?;
    let sol = solution(&p, cfg)?;
    let n_grid = cfg.n_grid.unwrap_or(linearization::DEFAULT_GRID);
    if n_grid < linearization::MIN_GRID {
        return Err(Failure::Config(format!(
            "n_grid must be >= {}",
            linearization::MIN_GRID
        )));
    }
    let ell_max = cfg.ell_max.unwrap_or(4);
    if ell_max < 2 {
        return Err(Failure::Config("ell_max must be >= 2".into()));
    }
    let tol = cfg.spectrum_tol.unwrap_or(linearization::DEFAULT_TOL);
    let cert = linearization::certificate_with(&p, &sol, ell_max, tol, n_grid, 0.0)?;
    output::emit(cfg.json.as_deref(), &output::json_document(&cert)?)?;
    if cert.nondegenerate {
        Ok(())
    } else {
        Err(Failure::Verification(format!(
            "spectrum within {tol} of zero (min |λ| = {:e})",
            cert.min_abs
        )))
    }
}

fn cmd_branch(cfg: &RunConfig) -> Result<(), Failure> {
    let p = params(cfg)?;
    // the fold only exists for N = 3, q ≤ 4, outside the asymptotic regime
    let fold_cell = p.n == 3 && p.q > 2.0 && p.q <= 4.0;
    if !fold_cell {
        p.require_regime()?;
    }
    let grid = grid(cfg, asymptotics::default_branch_grid())?;
    let map = asymptotics::branch_map(&p, &grid)?;
    output::emit(cfg.json.as_deref(), &output::json_document(&map)?)
}

fn run(cli: Cli) -> Result<(), Failure> {
    let file = RunConfig::load(cli.config.as_deref())?;
    let cfg = file.overlay(cli.command.flags(cli.jobs));
    match cli.command {
        Command::Constants { .. } => cmd_constants(&cfg),
        Command::Solve { .. } => cmd_solve(&cfg),
        Command::Sweep { .. } => cmd_sweep(&cfg),
        Command::Verify { .. } => cmd_verify(&cfg),
        Command::Decompose { .. } => cmd_decompose(&cfg),
        Command::Spectrum { .. } => cmd_spectrum(&cfg),
        Command::Branch { .. } => cmd_branch(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bnlab: {e}");
            ExitCode::from(e.code())
        }
    }
}
