//! Sweeps toward `ε̃ → 0` and the limit laws checked along them.
//!
//! A sweep solves the problem for a decreasing list of `ε̃` and reduces
//! each solution to a [`SweepRecord`]. The fits then compare the records
//! with the closed-form limits: the blow-up product `ε μ^{q+2-2*}`, the
//! energy deficit exponent, convergence of the rescaled profile to the
//! bubble, the pointwise upper bound and the limit `μ u_ε → c G(·, 0)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::constants::{alpha_nq, omega_n};
use crate::green::BallGreen;
use crate::radial::{solve_eps_tilde, RadialSolution, ShootOptions};
use crate::roots::bisect;
use crate::{Error, Params, Result};

/// Residual gate applied to every swept solution.
pub const RESIDUAL_GATE: f64 = 1e-6;

/// 25 points, log-uniform from `1e-2` down to `1e-8`.
pub fn default_grid() -> Vec<f64> {
    log_grid(1e-2, 1e-8, 25)
}

/// `count` log-uniform points from `from` to `to` (either direction).
pub fn log_grid(from: f64, to: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![from];
    }
    let (a, b) = (from.log10(), to.log10());
    (0..count)
        .map(|k| 10f64.powf(a + (b - a) * k as f64 / (count - 1) as f64))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub eps_tilde: f64,
    pub eps: f64,
    pub mu: f64,
    #[serde(rename = "R_tilde")]
    pub r_tilde: f64,
    #[serde(rename = "S_eps")]
    pub s_eps: f64,
    pub blowup_product: f64,
    pub deficit: f64,
    pub profile_dist: f64,
    pub upper_bound_ratio: f64,
    pub nehari_residual: f64,
    pub pohozaev_residual: f64,
    pub sobolev_quotient: f64,
    /// Relative deviation of `μ u_ε` from its Green's function limit on
    /// `r ∈ [0.7, 0.95]`.
    pub green_deviation: f64,
}

impl SweepRecord {
    pub fn from_solution(p: &Params, sol: &RadialSolution) -> Result<Self> {
        Ok(Self {
            eps_tilde: sol.eps_tilde,
            eps: sol.eps,
            mu: sol.mu,
            r_tilde: sol.r_tilde,
            s_eps: sol.energy,
            blowup_product: sol.blowup_product(),
            deficit: sol.energy_deficit,
            profile_dist: profile_distance(p, sol, &profile_grid()),
            upper_bound_ratio: upper_bound_check(p, sol),
            nehari_residual: sol.nehari_residual,
            pohozaev_residual: sol.pohozaev_residual,
            sobolev_quotient: sol.sobolev_quotient(),
            green_deviation: boundary_green_deviation(p, sol)?,
        })
    }
}

/// A grid point whose solve failed or missed the residual gate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepFailure {
    pub index: usize,
    pub eps_tilde: f64,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Sweep {
    pub params: Params,
    pub records: Vec<SweepRecord>,
    pub failures: Vec<SweepFailure>,
    #[serde(skip)]
    pub solutions: Vec<RadialSolution>,
}

impl Sweep {
    /// Share of grid points that produced a record.
    pub fn success_rate(&self) -> f64 {
        let total = self.records.len() + self.failures.len();
        if total == 0 {
            0.0
        } else {
            self.records.len() as f64 / total as f64
        }
    }
}

/// Solves every grid point, in parallel on `jobs` threads (`0` means the
/// rayon default). Output order follows the grid.
pub fn sweep(p: &Params, eps_tilde_grid: &[f64], jobs: usize) -> Result<Sweep> {
    if eps_tilde_grid.is_empty() {
        return Err(Error::Precondition("empty ε̃ grid".into()));
    }
    if eps_tilde_grid.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
        return Err(Error::Precondition("ε̃ grid must be positive".into()));
    }
    if eps_tilde_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Precondition("ε̃ grid must be strictly decreasing".into()));
    }
    let work = |et: &f64| -> Result<(RadialSolution, SweepRecord)> {
        let sol = solve_eps_tilde(p, *et, &ShootOptions::default())?;
        let rec = SweepRecord::from_solution(p, &sol)?;
        Ok((sol, rec))
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Precondition(format!("thread pool: {e}")))?;
    let results: Vec<Result<(RadialSolution, SweepRecord)>> =
        pool.install(|| eps_tilde_grid.par_iter().map(work).collect());
    let mut out = Sweep {
        params: *p,
        records: Vec::new(),
        failures: Vec::new(),
        solutions: Vec::new(),
    };
    for (index, (res, et)) in results.into_iter().zip(eps_tilde_grid).enumerate() {
        let fail = |reason: String| SweepFailure {
            index,
            eps_tilde: *et,
            reason,
        };
        match res {
            Ok((sol, rec)) => {
                if !(rec.nehari_residual <= RESIDUAL_GATE && rec.pohozaev_residual <= RESIDUAL_GATE) {
                    out.failures.push(fail(format!(
                        "residual gate: nehari {:e}, pohozaev {:e}",
                        rec.nehari_residual, rec.pohozaev_residual
                    )));
                } else {
                    out.records.push(rec);
                    out.solutions.push(sol);
                }
            }
            Err(e) => out.failures.push(fail(e.to_string())),
        }
    }
    Ok(out)
}

/// Result of a limit or slope fit. Fields that do not apply are `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub limit_estimate: Option<f64>,
    pub target: Option<f64>,
    /// `|estimate - target| / |target|` of the fitted limit or slope.
    pub rel_error: f64,
    pub slope_estimate: Option<f64>,
    pub slope_target: Option<f64>,
    pub r_squared: Option<f64>,
    /// Extrapolation stable under dropping the last point, or fit
    /// residual acceptable.
    pub stable: bool,
    pub notes: Vec<String>,
}

/// `α_{N,q} R(0)` on the unit ball.
pub fn blowup_target(p: &Params) -> Result<f64> {
    let g = BallGreen::new(p.n, 1.0)?;
    Ok(alpha_nq(p)? * g.robin(&vec![0.0; p.n])?)
}

/// Extrapolates `P(ε) = L + C ε^γ` through three points with decreasing
/// `ε`. Returns `(L, γ)`, or `None` when the differences change sign.
pub fn richardson_power(eps: [f64; 3], vals: [f64; 3]) -> Option<(f64, f64)> {
    let (d1, d2) = (vals[0] - vals[1], vals[1] - vals[2]);
    if d1 == 0.0 || d2 == 0.0 || d1.signum() != d2.signum() {
        return None;
    }
    let ratio = d1 / d2;
    let h = |g: f64| {
        let (a, b, c) = (eps[0].powf(g), eps[1].powf(g), eps[2].powf(g));
        (a - b) / (b - c) - ratio
    };
    let gamma = bisect(h, 1e-3, 20.0, 1e-13, 200).ok()?;
    let c = d1 / (eps[0].powf(gamma) - eps[1].powf(gamma));
    Some((vals[2] - c * eps[2].powf(gamma), gamma))
}

fn require_span(records: &[SweepRecord]) -> Result<()> {
    if records.len() < 6 {
        return Err(Error::Precondition(format!(
            "need at least 6 records, got {}",
            records.len()
        )));
    }
    let (lo, hi) = records
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r.eps), hi.max(r.eps)));
    if (hi / lo).log10() < 3.0 - 1e-9 {
        return Err(Error::Precondition(format!(
            "records span {:.2} decades of ε, need 3",
            (hi / lo).log10()
        )));
    }
    Ok(())
}

/// Richardson extrapolation of `ε μ^{q+2-2*}` against `α_{N,q} R(0)`.
pub fn blowup_rate_fit(p: &Params, records: &[SweepRecord]) -> Result<FitReport> {
    require_span(records)?;
    let target = blowup_target(p)?;
    let n = records.len();
    let pick = |idx: [usize; 3]| {
        let e = idx.map(|i| records[i].eps);
        let v = idx.map(|i| records[i].blowup_product);
        richardson_power(e, v)
    };
    let mut notes = Vec::new();
    let tail: Vec<f64> = records[n - 5..].iter().map(|r| r.blowup_product).collect();
    let increasing = tail.windows(2).all(|w| w[1] > w[0]);
    let decreasing = tail.windows(2).all(|w| w[1] < w[0]);
    if !(increasing || decreasing) {
        notes.push("blow-up product is not monotone over the last 5 records".into());
    }
    let (limit, gamma, stable) = match (pick([n - 3, n - 2, n - 1]), pick([n - 4, n - 3, n - 2])) {
        (Some((l, g)), Some((l2, _))) => {
            let stable = ((l - l2) / l).abs() <= 0.01;
            if !stable {
                notes.push(format!("extrapolant moved from {l2} to {l} when adding the last point"));
            }
            (l, Some(g), stable)
        }
        _ => {
            notes.push("tail oscillates; reporting the last value".into());
            (records[n - 1].blowup_product, None, false)
        }
    };
    Ok(FitReport {
        limit_estimate: Some(limit),
        target: Some(target),
        rel_error: ((limit - target) / target).abs(),
        slope_estimate: gamma,
        slope_target: None,
        r_squared: None,
        stable: stable && (increasing || decreasing),
        notes,
    })
}

/// Least-squares line `y = a + b x`; returns `(a, b, R²)`.
pub fn least_squares(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    let n = x.len() as f64;
    if x.len() < 2 || x.len() != y.len() {
        return Err(Error::Fit("need at least two points for a line".into()));
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("degenerate abscissae".into()));
    }
    let b = sxy / sxx;
    let a = my - b * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok((a, b, r2))
}

/// Log-log slope of the energy deficit against `ε` over the tail half.
pub fn deficit_rate_fit(p: &Params, records: &[SweepRecord]) -> Result<FitReport> {
    require_span(records)?;
    let mut notes = Vec::new();
    let usable: Vec<&SweepRecord> = records.iter().filter(|r| r.deficit >= 1e-13).collect();
    if usable.len() < records.len() {
        notes.push(format!(
            "dropped {} records with deficit below 1e-13",
            records.len() - usable.len()
        ));
    }
    let tail = &usable[usable.len() / 2..];
    let x: Vec<f64> = tail.iter().map(|r| r.eps.ln()).collect();
    let y: Vec<f64> = tail.iter().map(|r| r.deficit.ln()).collect();
    let (a, slope, r2) = least_squares(&x, &y)?;
    let target = p.deficit_exponent();
    Ok(FitReport {
        limit_estimate: Some(a.exp()),
        target: None,
        rel_error: ((slope - target) / target).abs(),
        slope_estimate: Some(slope),
        slope_target: Some(target),
        r_squared: Some(r2),
        stable: r2 >= 0.999,
        notes,
    })
}

/// 512 evenly spaced points on `[0, 10]`.
pub fn profile_grid() -> Vec<f64> {
    (0..512).map(|k| 10.0 * k as f64 / 511.0).collect()
}

/// `sup |v_ε - U|` over `grid`, where `v_ε(x) = μ^{-1} u(μ^{-2/(N-2)} x)` is
/// exactly the unit-height profile `ũ` and `U` the normalized bubble.
pub fn profile_distance(_p: &Params, sol: &RadialSolution, grid: &[f64]) -> f64 {
    let shot = sol.shoot_result();
    grid.iter()
        .map(|&s| {
            if s < sol.r_tilde {
                shot.deviation(s).0.abs()
            } else {
                // outside the rescaled ball v_ε vanishes
                crate::bubbles::NormalizedBubble::new(sol.params.n)
                    .map(|u| u.radial(s))
                    .unwrap_or(f64::NAN)
            }
        })
        .fold(0.0, f64::max)
}

/// `sup u_ε / B` with `B(x) = C μ (N(N-2) + μ^{2*-2}|x|²)^{-(N-2)/2}` and
/// `C = (N(N-2))^{(N-2)/2}`, the constant that makes `B(0) = μ`. Then
/// `B(x) = μ U(μ^{2/(N-2)}|x|)` and the ratio is `sup ũ/U`.
pub fn upper_bound_check(_p: &Params, sol: &RadialSolution) -> f64 {
    let shot = sol.shoot_result();
    let u = match crate::bubbles::NormalizedBubble::new(sol.params.n) {
        Ok(u) => u,
        Err(_) => return f64::NAN,
    };
    let mesh = crate::quad::asinh_edges(sol.r_tilde, 1.0, 2048);
    mesh.iter()
        .map(|&s| shot.u(s) / u.radial(s))
        .fold(0.0, f64::max)
}

/// `(1/N) α_N^{2*} ω_N G(r, 0)` on the unit ball.
pub fn green_limit(p: &Params, r: f64) -> Result<f64> {
    let g = BallGreen::new(p.n, 1.0)?;
    let mut x = vec![0.0; p.n];
    x[0] = r;
    let k = p.alpha_n().powf(p.two_star) * omega_n(p.n)? / p.dim();
    Ok(k * g.green(&x, &vec![0.0; p.n])?)
}

/// Radii of the evaluation band `[0.7, 0.95]`.
pub fn green_band() -> Vec<f64> {
    (0..64).map(|k| 0.7 + 0.25 * k as f64 / 63.0).collect()
}

/// `sup_{r ∈ [0.7, 0.95]} |μ u_ε(r) / ((1/N) α_N^{2*} ω_N G(r,0)) - 1|`
pub fn boundary_green_deviation(p: &Params, sol: &RadialSolution) -> Result<f64> {
    let mut worst = 0.0f64;
    for r in green_band() {
        let lim = green_limit(p, r)?;
        worst = worst.max((sol.mu * sol.u(r) / lim - 1.0).abs());
    }
    Ok(worst)
}

/// Per-record Green deviations and whether they decrease along the sweep.
pub fn boundary_green_limit(_p: &Params, records: &[SweepRecord]) -> Result<FitReport> {
    if records.is_empty() {
        return Err(Error::Precondition("no records".into()));
    }
    let devs: Vec<f64> = records.iter().map(|r| r.green_deviation).collect();
    let decreasing = devs.windows(2).all(|w| w[1] < w[0]);
    let last = *devs.last().unwrap();
    let mut notes = vec![format!("deviations: {devs:?}")];
    if !decreasing {
        notes.push("deviation does not decrease monotonically".into());
    }
    Ok(FitReport {
        limit_estimate: Some(last),
        target: Some(0.0),
        rel_error: last,
        slope_estimate: None,
        slope_target: None,
        r_squared: None,
        stable: decreasing,
        notes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchPoint {
    pub eps_tilde: f64,
    pub mu: f64,
    pub eps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchMap {
    pub points: Vec<BranchPoint>,
    /// Smallest `ε` seen on the grid.
    pub eps_min: f64,
    pub mu_at_min: f64,
    /// The minimum is attained strictly inside the `μ` range.
    pub interior_minimum: bool,
    /// `ε` is monotone in `μ`.
    pub monotone: bool,
    /// Some `ε > ε₀` is reached at two different `μ`.
    pub two_branches: bool,
    pub failures: Vec<SweepFailure>,
}

/// 49 points from `1e2` down to `1e-6`, wide enough to contain the fold of
/// the `N = 3` branch.
pub fn default_branch_grid() -> Vec<f64> {
    log_grid(1e2, 1e-6, 49)
}

/// Tabulates `(μ, ε)` along the branch and describes its shape.
pub fn branch_map(p: &Params, eps_tilde_grid: &[f64]) -> Result<BranchMap> {
    if eps_tilde_grid.len() < 3 {
        return Err(Error::Precondition("branch_map needs at least 3 points".into()));
    }
    let mut points = Vec::new();
    let mut failures = Vec::new();
    for (index, &et) in eps_tilde_grid.iter().enumerate() {
        match solve_eps_tilde(p, et, &ShootOptions::default()) {
            Ok(s) => points.push(BranchPoint {
                eps_tilde: et,
                mu: s.mu,
                eps: s.eps,
            }),
            Err(e) => failures.push(SweepFailure {
                index,
                eps_tilde: et,
                reason: e.to_string(),
            }),
        }
    }
    if points.len() < 3 {
        return Err(Error::NoConvergence("too few branch points solved".into()));
    }
    points.sort_by(|a, b| a.mu.total_cmp(&b.mu));
    let (imin, min) = points
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.eps.total_cmp(&b.1.eps))
        .map(|(i, b)| (i, b.clone()))
        .unwrap();
    let last = points.len() - 1;
    let interior = imin > 0 && imin < last;
    let inc = points.windows(2).all(|w| w[1].eps > w[0].eps);
    let dec = points.windows(2).all(|w| w[1].eps < w[0].eps);
    let two = interior && {
        let level = points[0].eps.min(points[last].eps);
        level > min.eps
    };
    Ok(BranchMap {
        eps_min: min.eps,
        mu_at_min: min.mu,
        interior_minimum: interior,
        monotone: inc || dec,
        two_branches: two,
        points,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn grids() {
        let g = default_grid();
        assert_eq!(g.len(), 25);
        assert!(rel(g[0], 1e-2) < 1e-14 && rel(g[24], 1e-8) < 1e-14);
        assert!(g.windows(2).all(|w| w[1] < w[0]));
        let pg = profile_grid();
        assert_eq!(pg.len(), 512);
        assert_eq!(pg[511], 10.0);
    }

    #[test]
    fn richardson_recovers_power_law() {
        let f = |e: f64| 3.0 + 0.7 * e.powf(1.3);
        let e = [1e-2, 5e-3, 2e-3];
        let (l, g) = richardson_power(e, e.map(f)).unwrap();
        assert!((l - 3.0).abs() < 1e-10 && (g - 1.3).abs() < 1e-8);
        assert!(richardson_power(e, [1.0, 2.0, 1.5]).is_none());
    }

    #[test]
    fn least_squares_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = x.map(|v| 1.0 - 2.0 * v);
        let (a, b, r2) = least_squares(&x, &y).unwrap();
        assert!((a - 1.0).abs() < 1e-14 && (b + 2.0).abs() < 1e-14 && (r2 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn targets() {
        let t = blowup_target(&Params::new(4, 3.0).unwrap()).unwrap();
        assert!(rel(t, 24.0) < 1e-12);
        for (n, q) in [(3usize, 5.0), (5, 3.0), (6, 2.5), (7, 2.1)] {
            assert!(blowup_target(&Params::new(n, q).unwrap()).unwrap() > 0.0);
        }
        assert_eq!(Params::new(4, 3.0).unwrap().deficit_exponent(), 2.0);
        assert!(rel(Params::new(5, 3.0).unwrap().deficit_exponent(), 1.2) < 1e-15);
    }

    #[test]
    fn green_limit_n3() {
        let p = Params::new(3, 5.0).unwrap();
        let a3 = 3f64.powf(0.25);
        for r in [0.7, 0.9] {
            let expected = a3.powi(6) * 4.0 * std::f64::consts::PI / 3.0 / (4.0 * std::f64::consts::PI) * (1.0 / r - 1.0);
            assert!(rel(green_limit(&p, r).unwrap(), expected) < 1e-13);
        }
    }

    #[test]
    fn sweep_n4_q3() {
        let p = Params::new(4, 3.0).unwrap();
        let grid = log_grid(1e-2, 1e-8, 13);
        let sw = sweep(&p, &grid, 2).unwrap();
        assert!(sw.failures.is_empty());
        let r = &sw.records;
        for w in r.windows(2) {
            assert!(w[1].mu > w[0].mu);
            assert!(w[1].eps < w[0].eps);
            assert!(w[1].s_eps > w[0].s_eps);
            assert!(w[1].profile_dist < w[0].profile_dist);
            assert!(w[1].green_deviation < w[0].green_deviation);
        }
        assert!(r.iter().all(|x| x.deficit > 0.0 && x.blowup_product > 0.0));
        assert!(r.iter().all(|x| (x.upper_bound_ratio - 1.0).abs() < 1e-12));
        let fit = blowup_rate_fit(&p, r).unwrap();
        assert!(fit.rel_error < 0.05 && fit.stable, "{fit:?}");
        let d = deficit_rate_fit(&p, r).unwrap();
        assert!(d.rel_error < 0.1 && d.stable, "{d:?}");
        // identical reruns
        let again = sweep(&p, &grid, 1).unwrap();
        assert_eq!(again.records, sw.records);
    }

    #[test]
    fn sweep_rejects_bad_grids() {
        let p = Params::new(4, 3.0).unwrap();
        assert!(sweep(&p, &[1e-3, 1e-2], 1).is_err());
        assert!(sweep(&p, &[1e-3, -1.0], 1).is_err());
        assert!(sweep(&p, &[], 1).is_err());
        let few: Vec<SweepRecord> = Vec::new();
        assert!(blowup_rate_fit(&p, &few).is_err());
    }

    #[test]
    fn branch_shapes() {
        let fold = branch_map(&Params::new(3, 3.0).unwrap(), &default_branch_grid()).unwrap();
        assert!(fold.interior_minimum && fold.two_branches && fold.eps_min > 0.0, "{fold:?}");
        let mono = branch_map(&Params::new(4, 3.0).unwrap(), &log_grid(1e-1, 1e-7, 13)).unwrap();
        assert!(mono.monotone && !mono.interior_minimum);
        // ε decreases as μ grows
        assert!(mono.points.first().unwrap().eps > mono.points.last().unwrap().eps);
    }
}
