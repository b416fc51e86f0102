//! Radial solutions on the unit ball by shooting.
//!
//! The height is normalized to one and the equation
//!
//! ```text
//!     ũ'' + (N-1)/s ũ' + ũ^(2*-1) + ε̃ ũ^(q-1) = 0,   ũ(0) = 1, ũ'(0) = 0
//! ```
//!
//! is integrated outward until the first zero `R̃`. Rescaling by `R̃` gives
//! a solution of the Dirichlet problem on the unit ball with
//! `ε = ε̃ R̃^{(2N-(N-2)q)/2}` and `μ = u(0) = R̃^{(N-2)/2}`.
//!
//! For small `ε̃` the solution is a tiny perturbation of the normalized
//! bubble `U` over many decades of `s`, so the integrated unknown is the
//! deviation `z = ũ - U` under pure relative error control. The energy
//! integrals are carried along as extra ODE states, which keeps them as
//! accurate as the solution itself no matter how concentrated it is.

use serde::Serialize;

use crate::bubbles::NormalizedBubble;
use crate::constants::{omega_n, sobolev_sn2};
use crate::ode::{Dopri5, Trajectory};
use crate::quad::{asinh_edges, integrate_half_line};
use crate::roots::brent_with_values;
use crate::{Error, Params, Result};

/// Shooting controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootOptions {
    /// Relative tolerance of the integrator.
    pub rtol: f64,
    /// Start of the numerical integration; `[0, r0]` uses the Taylor series.
    pub r0: f64,
    /// Give up looking for a zero beyond this radius.
    pub r_max: f64,
}

impl Default for ShootOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            r0: 1e-4,
            r_max: 1e18,
        }
    }
}

/// `ω_N` times the scaled integrals over `[0, R̃]` (or `[0, r_max]` when no
/// zero was found).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaledFunctionals {
    /// `∫|∇ũ|²`
    pub grad_sq: f64,
    /// `∫ũ^q`
    pub lq_q: f64,
    /// `∫ũ^{2*}`
    pub l2star: f64,
    /// `∫(U^{2*} - ũ^{2*})` over the same ball
    pub bubble_excess: f64,
}

#[derive(Debug, Clone)]
pub struct ShootResult {
    params: Params,
    pub eps_tilde: f64,
    /// `R̃`, the first zero, if one was found before `r_max`.
    pub first_zero: Option<f64>,
    pub functionals: ScaledFunctionals,
    /// `ũ'(R̃)` when the zero was found.
    pub slope_at_zero: Option<f64>,
    bubble: NormalizedBubble,
    series: Series,
    r0: f64,
    end: f64,
    traj: Option<Trajectory<6>>,
}

/// Taylor data at the origin: `z = z2 s² + z4 s⁴`.
#[derive(Debug, Clone, Copy)]
struct Series {
    z2: f64,
    z4: f64,
}

impl ShootResult {
    pub fn params(&self) -> Params {
        self.params
    }

    /// Right end of the integrated interval.
    pub fn end(&self) -> f64 {
        self.end
    }

    /// `z(s) = ũ(s) - U(s)` and `z'(s)`.
    pub fn deviation(&self, s: f64) -> (f64, f64) {
        let s = s.clamp(0.0, self.end);
        match &self.traj {
            Some(t) if s >= self.r0 => {
                let y = t.eval(s);
                (y[0], y[1])
            }
            _ => {
                let Series { z2, z4 } = self.series;
                (z2 * s * s + z4 * s.powi(4), 2.0 * z2 * s + 4.0 * z4 * s.powi(3))
            }
        }
    }

    /// `ũ(s)`, clamped to the integrated interval.
    pub fn u(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, self.end);
        if Some(s) == self.first_zero {
            return 0.0;
        }
        (self.bubble.radial(s) + self.deviation(s).0).max(0.0)
    }

    /// `ũ'(s)`
    pub fn du(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, self.end);
        self.bubble.radial_dr(s) + self.deviation(s).1
    }

    /// `(s, ũ, ũ')` on a mesh graded toward the origin.
    pub fn profile(&self, points: usize) -> Vec<[f64; 3]> {
        graded_mesh(self.end, 1.0, points)
            .into_iter()
            .map(|s| [s, self.u(s), self.du(s)])
            .collect()
    }
}

fn graded_mesh(end: f64, scale: f64, points: usize) -> Vec<f64> {
    let points = points.max(2);
    let mut m = asinh_edges(end, scale, points - 1);
    m[points - 1] = end;
    m
}

/// Integrates the normalized problem for one `ε̃`.
///
/// `tol` is the relative tolerance of the integrator.
pub fn shoot(p: &Params, eps_tilde: f64, r_max: f64, tol: f64) -> Result<ShootResult> {
    shoot_with(
        p,
        eps_tilde,
        &ShootOptions {
            rtol: tol,
            r_max,
            ..ShootOptions::default()
        },
    )
}

pub fn shoot_with(p: &Params, eps_tilde: f64, opts: &ShootOptions) -> Result<ShootResult> {
    if !(eps_tilde >= 0.0) || !eps_tilde.is_finite() {
        return Err(Error::Domain(format!("ε̃ must be >= 0, got {eps_tilde}")));
    }
    if !(opts.r_max > opts.r0) || !(opts.r0 > 0.0) {
        return Err(Error::Domain(format!(
            "need 0 < r0 < r_max, got r0 = {}, r_max = {}",
            opts.r0, opts.r_max
        )));
    }
    if !(opts.rtol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be > 0, got {}", opts.rtol)));
    }
    let n = p.n;
    let nf = p.dim();
    let q = p.q;
    let ts = p.two_star;
    let pw = ts - 1.0;
    let bubble = NormalizedBubble::new(n)?;
    let om = omega_n(n)?;
    let series = Series {
        z2: -eps_tilde / (2.0 * nf),
        z4: eps_tilde * (pw + (q - 1.0) * (1.0 + eps_tilde)) / (8.0 * nf * (nf + 2.0)),
    };

    if eps_tilde == 0.0 {
        // ũ = U exactly, which never vanishes
        return Ok(ShootResult {
            params: *p,
            eps_tilde,
            first_zero: None,
            functionals: ScaledFunctionals {
                grad_sq: f64::NAN,
                lq_q: f64::NAN,
                l2star: f64::NAN,
                bubble_excess: 0.0,
            },
            slope_at_zero: None,
            bubble,
            series,
            r0: opts.r0,
            end: opts.r_max,
            traj: None,
        });
    }

    let r0 = opts.r0;
    let Series { z2, z4 } = series;
    let a = -(1.0 + eps_tilde) / (2.0 * nf);
    let y0 = [
        z2 * r0 * r0 + z4 * r0.powi(4),
        2.0 * z2 * r0 + 4.0 * z4 * r0.powi(3),
        4.0 * a * a * r0.powf(nf + 2.0) / (nf + 2.0),
        r0.powf(nf) / nf,
        -ts * z2 * r0.powf(nf + 2.0) / (nf + 2.0),
        r0.powf(nf) / nf,
    ];
    let rhs = |s: f64, y: &[f64; 6]| -> [f64; 6] {
        let big_u = bubble.radial(s);
        let du_bubble = bubble.radial_dr(s);
        let z = y[0];
        let u = big_u + z;
        let du = du_bubble + y[1];
        let w = s.powf(nf - 1.0);
        let up_pw = big_u.powf(pw);
        let up_ts = big_u.powf(ts);
        let (diff_pw, u_q1, u_q, excess, u_ts) = if u > 0.0 {
            let l = (z / big_u).ln_1p();
            let uq1 = u.powf(q - 1.0);
            let ets = (ts * l).exp_m1();
            (up_pw * (pw * l).exp_m1(), uq1, uq1 * u, -up_ts * ets, up_ts * (1.0 + ets))
        } else {
            (-up_pw, 0.0, 0.0, up_ts, 0.0)
        };
        [
            y[1],
            -(nf - 1.0) / s * y[1] - diff_pw - eps_tilde * u_q1,
            du * du * w,
            u_q * w,
            excess * w,
            u_ts * w,
        ]
    };
    let event = |s: f64, y: &[f64; 6]| bubble.radial(s) + y[0];
    let solver = Dopri5::new(opts.rtol, [1e-300; 6]).with_initial_step(0.1 * r0);
    let run = solver.integrate(rhs, r0, y0, opts.r_max, Some(event))?;
    let traj = run.trajectory;
    let end = traj.t_end();
    let y = *traj.y_end();
    let slope = run.event.map(|s| bubble.radial_dr(s) + y[1]);
    Ok(ShootResult {
        params: *p,
        eps_tilde,
        first_zero: run.event,
        functionals: ScaledFunctionals {
            grad_sq: om * y[2],
            lq_q: om * y[3],
            bubble_excess: om * y[4],
            l2star: om * y[5],
        },
        slope_at_zero: slope,
        bubble,
        series,
        r0,
        end,
        traj: Some(traj),
    })
}

/// A positive radial solution on the unit ball.
#[derive(Debug, Clone, Serialize)]
pub struct RadialSolution {
    pub params: Params,
    pub eps_tilde: f64,
    pub r_tilde: f64,
    pub eps: f64,
    /// `u(0) = ‖u‖_∞`
    pub mu: f64,
    /// `S_ε = I_ε(u)`
    pub energy: f64,
    /// `S^{N/2}/N - S_ε`
    pub energy_deficit: f64,
    pub grad_sq: f64,
    pub lq_norm_q: f64,
    pub l2star_norm: f64,
    pub nehari_residual: f64,
    pub pohozaev_residual: f64,
    #[serde(skip)]
    shot: ShootResult,
}

impl RadialSolution {
    pub fn shoot_result(&self) -> &ShootResult {
        &self.shot
    }

    /// `ε μ^{q+2-2*} = ε̃ R̃^{N-2}`
    pub fn blowup_product(&self) -> f64 {
        self.eps_tilde * self.r_tilde.powf(self.params.dim() - 2.0)
    }

    /// `u(r)` for `r ∈ [0, 1]`.
    pub fn u(&self, r: f64) -> f64 {
        self.mu * self.shot.u(r * self.r_tilde)
    }

    /// `u'(r)`
    pub fn du(&self, r: f64) -> f64 {
        self.mu * self.r_tilde * self.shot.du(r * self.r_tilde)
    }

    /// `(r, u, u')` on `points` radii, graded toward the concentration
    /// scale `1/R̃` and ending exactly at `r = 1`.
    pub fn profile(&self, points: usize) -> Vec<[f64; 3]> {
        graded_mesh(1.0, 1.0 / self.r_tilde, points)
            .into_iter()
            .map(|r| [r, self.u(r), self.du(r)])
            .collect()
    }

    /// `∫|∇u|² / (∫u^{2*})^{2/2*}`
    pub fn sobolev_quotient(&self) -> f64 {
        self.grad_sq / self.l2star_norm.powf(2.0 / self.params.two_star)
    }

    /// Relative residual of the unit-ball ODE at `r`: `u''` is the central
    /// difference of the profile slope with step `h`.
    pub fn ode_residual(&self, r: f64, h: f64) -> f64 {
        let nf = self.params.dim();
        let u0 = self.u(r);
        let d1 = self.du(r);
        let d2 = (self.du(r + h) - self.du(r - h)) / (2.0 * h);
        let src = u0.powf(self.params.two_star - 1.0) + self.eps * u0.powf(self.params.q - 1.0);
        let res = d2 + (nf - 1.0) / r * d1 + src;
        res / (d2.abs() + ((nf - 1.0) / r * d1).abs() + src)
    }
}

/// Maps a shooting result with a zero to the unit ball and fills the
/// energy fields.
pub fn scale_to_unit_ball(p: &Params, s: ShootResult) -> Result<RadialSolution> {
    let r_tilde = s.first_zero.ok_or_else(|| {
        Error::Precondition(format!("shooting with ε̃ = {} found no zero", s.eps_tilde))
    })?;
    let nf = p.dim();
    let mut sol = RadialSolution {
        params: *p,
        eps_tilde: s.eps_tilde,
        r_tilde,
        eps: s.eps_tilde * r_tilde.powf(p.eps_scaling_power()),
        mu: r_tilde.powf((nf - 2.0) / 2.0),
        energy: f64::NAN,
        energy_deficit: f64::NAN,
        grad_sq: f64::NAN,
        lq_norm_q: f64::NAN,
        l2star_norm: f64::NAN,
        nehari_residual: f64::NAN,
        pohozaev_residual: f64::NAN,
        shot: s,
    };
    sol = energy_functionals(p, sol)?;
    sol.pohozaev_residual = pohozaev_residual(p, &sol);
    Ok(sol)
}

/// `∫_{R̃}^∞ U^{2*} s^{N-1} ds`, the part of the bubble's critical norm
/// outside the scaled ball.
fn bubble_tail(n: usize, r_tilde: f64) -> f64 {
    let nf = n as f64;
    let a = nf * (nf - 2.0);
    // s = R̃ e^x
    integrate_half_line(|x| {
        // U^{2*} s^N = (a / (a/s + s))^N, finite for every s
        let s = r_tilde * x.exp();
        (a / (a / s + s)).powf(nf)
    })
}

/// Fills `∫|∇u|²`, `∫u^q`, `∫u^{2*}`, `S_ε`, the deficit and the Nehari
/// residual from the integrals carried by the shooting run.
///
/// The gradient and critical norms are scale invariant, and
/// `ε∫u^q = ε̃∫ũ^q`, so everything is read off the scaled integrals.
pub fn energy_functionals(p: &Params, mut sol: RadialSolution) -> Result<RadialSolution> {
    let f = sol.shot.functionals;
    let nf = p.dim();
    let q = p.q;
    let et = sol.eps_tilde;
    sol.grad_sq = f.grad_sq;
    sol.l2star_norm = f.l2star;
    sol.lq_norm_q = f.lq_q * sol.mu.powf(q) / sol.r_tilde.powf(nf);
    let eb = et * f.lq_q;
    sol.nehari_residual = (f.grad_sq - f.l2star - eb).abs() / f.grad_sq;
    // with the Nehari identity, S_ε = ∫u^{2*}/N + (1/2 - 1/q) ε∫u^q and the
    // deficit becomes a sum of small terms with no cancellation against
    // S^{N/2}
    let tail = omega_n(p.n)? * bubble_tail(p.n, sol.r_tilde);
    sol.energy_deficit = (f.bubble_excess + tail) / nf - (0.5 - 1.0 / q) * eb;
    sol.energy = sobolev_sn2(p.n)? / nf - sol.energy_deficit;
    Ok(sol)
}

/// `S_ε` straight from the definition of `I_ε`; agrees with
/// [`RadialSolution::energy`] up to the Nehari residual.
pub fn energy_direct(sol: &RadialSolution) -> f64 {
    let p = sol.params;
    let f = sol.shot.functionals;
    0.5 * f.grad_sq - f.l2star / p.two_star - sol.eps_tilde * f.lq_q / p.q
}

/// Relative residual of `ω_N u'(1)²/(2N) = (1/q - 1/2*) ε∫u^q`.
pub fn pohozaev_residual(p: &Params, sol: &RadialSolution) -> f64 {
    let (lhs, rhs) = pohozaev_sides(p, sol);
    (lhs - rhs).abs() / rhs.abs()
}

/// Both sides of the ball Pohozaev identity.
pub fn pohozaev_sides(p: &Params, sol: &RadialSolution) -> (f64, f64) {
    let nf = p.dim();
    let om = omega_n(p.n).unwrap_or(f64::NAN);
    let slope = sol.shot.slope_at_zero.unwrap_or(f64::NAN);
    // u'(1)² = μ² R̃² ũ'(R̃)² = R̃^N ũ'(R̃)²
    let lhs = om / (2.0 * nf) * sol.r_tilde.powf(nf) * slope * slope;
    let rhs = (1.0 / p.q - 1.0 / p.two_star) * sol.eps_tilde * sol.shot.functionals.lq_q;
    (lhs, rhs)
}

/// Shoots with `ε̃` and rescales.
pub fn solve_eps_tilde(p: &Params, eps_tilde: f64, opts: &ShootOptions) -> Result<RadialSolution> {
    let s = shoot_with(p, eps_tilde, opts)?;
    scale_to_unit_ball(p, s)
}

/// Lowest and highest `ε̃` probed by [`solve_for_eps`].
pub const EPS_TILDE_SEARCH: (f64, f64) = (1e-14, 1e2);

/// Finds the solution with `ε = eps_target` to relative accuracy `tol`.
///
/// `ε̃` is scanned upward from `1e-14` on a logarithmic grid and the first
/// crossing of the target is refined. This selects the branch with the
/// largest `R̃`, i.e. the most concentrated solution. When `ε` never
/// reaches the target (below the fold of the `N = 3` branch, for instance)
/// an [`Error::Unreachable`] is returned.
pub fn solve_for_eps(p: &Params, eps_target: f64, tol: f64) -> Result<RadialSolution> {
    solve_for_eps_with(p, eps_target, tol, &ShootOptions::default())
}

pub fn solve_for_eps_with(
    p: &Params,
    eps_target: f64,
    tol: f64,
    opts: &ShootOptions,
) -> Result<RadialSolution> {
    if !(eps_target > 0.0) || !eps_target.is_finite() {
        return Err(Error::Domain(format!("target ε must be > 0, got {eps_target}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be > 0, got {tol}")));
    }
    let ln_target = eps_target.ln();
    let misfit = |ln_et: f64| -> Result<f64> {
        let s = shoot_with(p, ln_et.exp(), opts)?;
        match s.first_zero {
            Some(r) => Ok((s.eps_tilde * r.powf(p.eps_scaling_power())).ln() - ln_target),
            None => Err(Error::Unreachable { target: eps_target }),
        }
    };
    let (lo, hi) = (EPS_TILDE_SEARCH.0.ln(), EPS_TILDE_SEARCH.1.ln());
    let per_decade = 4.0;
    let count = ((hi - lo) / std::f64::consts::LN_10 * per_decade).round() as usize;
    let step = (hi - lo) / count as f64;
    let mut prev = (lo, misfit(lo)?);
    let mut bracket = None;
    for k in 1..=count {
        let x = lo + step * k as f64;
        let fx = misfit(x)?;
        if fx == 0.0 || fx.signum() != prev.1.signum() {
            bracket = Some((prev, (x, fx)));
            break;
        }
        prev = (x, fx);
    }
    let ((a, fa), (b, fb)) = bracket.ok_or(Error::Unreachable { target: eps_target })?;
    let mut failure = None;
    let root = brent_with_values(
        |x| match misfit(x) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        a,
        b,
        fa,
        fb,
        1e-13,
        200,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let sol = solve_eps_tilde(p, root.exp(), opts)?;
    if ((sol.eps - eps_target) / eps_target).abs() > tol {
        return Err(Error::NoConvergence(format!(
            "reached ε = {} for target {eps_target} (tolerance {tol})",
            sol.eps
        )));
    }
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{alpha_nq, sobolev_constant};
    use crate::green::BallGreen;

    fn params(n: usize, q: f64) -> Params {
        Params::new(n, q).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn zero_eps_tilde_is_the_bubble() {
        let p = params(4, 3.0);
        for r_max in [10.0, 1e6] {
            let s = shoot(&p, 0.0, r_max, 1e-10).unwrap();
            assert!(s.first_zero.is_none());
            let u = NormalizedBubble::new(4).unwrap();
            assert_eq!(s.u(3.0), u.radial(3.0));
        }
        assert!(scale_to_unit_ball(&p, shoot(&p, 0.0, 10.0, 1e-10).unwrap()).is_err());
    }

    #[test]
    fn large_eps_tilde_has_a_zero() {
        for (n, q) in [(3usize, 4.5), (4, 3.0), (5, 2.5), (6, 2.2)] {
            let s = shoot(&params(n, q), 10.0, 1e6, 1e-11).unwrap();
            let r = s.first_zero.unwrap();
            assert!(r > 0.0 && r < 10.0, "N={n}: {r}");
            assert!(s.u(r).abs() <= 1e-12);
        }
    }

    #[test]
    fn first_zero_decreases_in_eps_tilde() {
        for (n, q) in [(3usize, 5.0), (4, 3.0), (5, 3.0)] {
            let p = params(n, q);
            let r: Vec<f64> = [1e-3, 1e-2, 1e-1]
                .iter()
                .map(|e| shoot(&p, *e, 1e18, 1e-11).unwrap().first_zero.unwrap())
                .collect();
            assert!(r[0] > r[1] && r[1] > r[2], "N={n}: {r:?}");
        }
    }

    #[test]
    fn scaled_profile_is_positive_and_decreasing() {
        let p = params(4, 3.0);
        let s = shoot(&p, 1e-3, 1e18, 1e-12).unwrap();
        assert!((s.u(0.0) - 1.0).abs() == 0.0 && s.du(0.0) == 0.0);
        let prof = s.profile(400);
        for w in prof.windows(2) {
            assert!(w[1][1] < w[0][1]);
        }
        for pt in &prof[1..prof.len() - 1] {
            assert!(pt[1] > 0.0 && pt[2] < 0.0);
        }
    }

    #[test]
    fn scaling_identities() {
        for (n, q) in [(3usize, 4.5), (4, 3.0), (5, 3.0), (7, 2.5)] {
            let p = params(n, q);
            let sol = solve_eps_tilde(&p, 1e-3, &ShootOptions::default()).unwrap();
            assert!(rel(sol.u(0.0), sol.mu) < 1e-15);
            let lhs = sol.eps * sol.mu.powf(p.blowup_power());
            assert!(rel(lhs, sol.blowup_product()) < 1e-12);
            assert!(sol.u(1.0) == 0.0);
        }
    }

    #[test]
    fn unit_ball_ode_residual() {
        let p = params(4, 3.0);
        let sol = solve_eps_tilde(&p, 1e-2, &ShootOptions::default()).unwrap();
        for r in [0.05, 0.2, 0.5, 0.8] {
            let h = 2e-5 * r;
            let res = sol.ode_residual(r, h).abs();
            assert!(res < 1e-8, "r={r}: {res}");
        }
        // second order in the difference step
        let (a, b) = (sol.ode_residual(0.3, 4e-3), sol.ode_residual(0.3, 2e-3));
        assert!((a / b - 4.0).abs() < 0.2, "{a} {b}");
    }

    #[test]
    fn nehari_and_energy_identities() {
        for (n, q) in [(3usize, 5.0), (4, 3.0), (5, 2.5), (6, 2.5)] {
            let p = params(n, q);
            for et in [1e-6, 1e-3, 1e-1] {
                let sol = solve_eps_tilde(&p, et, &ShootOptions::default()).unwrap();
                assert!(sol.nehari_residual < 1e-7, "N={n} ε̃={et}: {}", sol.nehari_residual);
                assert!(sol.pohozaev_residual < 1e-6, "N={n} ε̃={et}: {}", sol.pohozaev_residual);
                let sn2 = sobolev_sn2(n).unwrap();
                assert!(sol.energy > 0.0 && sol.energy < sn2 / n as f64);
                assert!(sol.energy_deficit > 0.0);
                let alt = (0.5 - 1.0 / q) * sol.grad_sq + (1.0 / q - 1.0 / p.two_star) * sol.l2star_norm;
                assert!(rel(alt, sol.energy) < 1e-7, "N={n} ε̃={et}");
                assert!(rel(energy_direct(&sol), sol.energy) < 1e-7);
                let (l, r) = pohozaev_sides(&p, &sol);
                assert!(l > 0.0 && r > 0.0);
            }
        }
    }

    #[test]
    fn functionals_match_independent_quadrature() {
        // resample the dense solution and integrate directly
        let p = params(5, 3.0);
        let sol = solve_eps_tilde(&p, 1e-2, &ShootOptions::default()).unwrap();
        let gl = crate::quad::GaussLegendre::new(20);
        let edges = asinh_edges(1.0, 0.2 / sol.r_tilde, 200);
        let om = omega_n(5).unwrap();
        let grad = om * gl.composite(&edges, |r| sol.du(r).powi(2) * r.powi(4));
        let lq = om * gl.composite(&edges, |r| sol.u(r).powf(3.0) * r.powi(4));
        assert!(rel(grad, sol.grad_sq) < 1e-8, "{grad} {}", sol.grad_sq);
        assert!(rel(lq, sol.lq_norm_q) < 1e-8);
    }

    #[test]
    fn pohozaev_residual_shrinks_with_tolerance() {
        let p = params(4, 3.0);
        let run = |rtol: f64| {
            let o = ShootOptions { rtol, ..ShootOptions::default() };
            solve_eps_tilde(&p, 1e-2, &o).unwrap().pohozaev_residual
        };
        let (a, b) = (run(1e-6), run(1e-6 / 32.0));
        assert!(a / b >= 4.0, "{a} {b}");
    }

    #[test]
    fn blowup_approaches_limit_and_sobolev_quotient_approaches_s() {
        let p = params(4, 3.0);
        let target = alpha_nq(&p).unwrap() * BallGreen::new(4, 1.0).unwrap().robin(&[0.0; 4]).unwrap();
        assert!(rel(target, 24.0) < 1e-12);
        let mut prev_eps = f64::INFINITY;
        let mut prev_mu = 0.0;
        let mut last = None;
        for et in [1e-2, 1e-4, 1e-6, 1e-8] {
            let sol = solve_eps_tilde(&p, et, &ShootOptions::default()).unwrap();
            assert!(sol.eps < prev_eps && sol.mu > prev_mu);
            prev_eps = sol.eps;
            prev_mu = sol.mu;
            last = Some(sol);
        }
        let sol = last.unwrap();
        assert!(rel(sol.blowup_product(), target) < 0.05, "{}", sol.blowup_product());
        assert!(rel(sol.sobolev_quotient(), sobolev_constant(4).unwrap()) < 0.01);
    }

    #[test]
    fn solve_for_eps_round_trip() {
        let p = params(4, 3.0);
        let sol = solve_for_eps(&p, 0.05, 1e-10).unwrap();
        assert!(rel(sol.eps, 0.05) <= 1e-10);
        assert!(sol.pohozaev_residual <= 1e-6);
        let again = solve_for_eps(&p, sol.eps, 1e-10).unwrap();
        assert!(rel(again.mu, sol.mu) < 1e-6);
        assert!(solve_for_eps(&p, -1.0, 1e-8).is_err());
    }

    #[test]
    fn n3_fold_has_unreachable_region() {
        let p = params(3, 3.0);
        // ε(ε̃) = ε̃ R̃^{3/2} blows up at both ends; its minimum is the fold
        let mut min_eps = f64::INFINITY;
        for k in 0..30 {
            let et = 10f64.powf(-6.0 + 0.25 * k as f64);
            let s = solve_eps_tilde(&p, et, &ShootOptions::default()).unwrap();
            min_eps = min_eps.min(s.eps);
        }
        assert!(matches!(
            solve_for_eps(&p, 0.5 * min_eps, 1e-8),
            Err(Error::Unreachable { .. })
        ));
        let sol = solve_for_eps(&p, 2.0 * min_eps, 1e-8).unwrap();
        assert!(rel(sol.eps, 2.0 * min_eps) < 1e-8);
    }
}
