//! Identity suite behind `bnlab verify`.
//!
//! Every check compares two independent routes to the same number and
//! reports the residual next to its threshold. A multiplicative fault can
//! be injected into the Green's function constant to confirm that the
//! suite notices.

use std::f64::consts::PI;

use serde::Serialize;

use crate::bubbles::{
    kernel_radial_dilation, radial_residual, BallProjection, Bubble, NormalizedBubble,
};
use crate::constants::{
    alpha_nq, c_nq, c_nq_quadrature, gamma_fn, omega_n, sobolev_sn2,
    sobolev_sn2_from_critical_norm,
};
use crate::green::BallGreen;
use crate::radial::{solve_eps_tilde, ShootOptions};
use crate::{Params, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    /// Sphere quadrature order for the Green identities.
    pub quad_order: usize,
    /// Factor applied to the Green's function constant (1 = no fault).
    pub green_fault: f64,
    /// `ε̃` of the solution whose Nehari and Pohozaev residuals are checked.
    pub eps_tilde: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            quad_order: 64,
            green_fault: 1.0,
            eps_tilde: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    fn new(name: &str, residual: Result<f64>, threshold: f64) -> Self {
        let residual = residual.unwrap_or(f64::INFINITY);
        Self {
            name: name.to_string(),
            residual,
            threshold,
            // NaN fails
            pass: residual <= threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub n: usize,
    pub q: f64,
    pub green_fault: f64,
    pub checks: Vec<Check>,
    pub all_pass: bool,
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// Runs the full suite for `(N, q)`.
pub fn verify_suite(p: &Params, opts: &VerifyOptions) -> VerifyReport {
    let n = p.n;
    let nf = p.dim();
    let green = BallGreen::new(n, 1.0).map(|g| g.with_constant_scale(opts.green_fault));
    let mut checks = Vec::new();

    checks.push(Check::new("gamma_recurrence", gamma_recurrence(), 1e-13));
    checks.push(Check::new("gamma_half_integers", gamma_half_integers(), 1e-13));
    checks.push(Check::new("sphere_area_recurrence", sphere_area_recurrence(), 1e-13));
    checks.push(Check::new(
        "c_nq_gamma_vs_quadrature",
        (|| Ok(rel(c_nq_quadrature(p)?, c_nq(p)?)))(),
        1e-8,
    ));
    checks.push(Check::new(
        "alpha_nq_vs_quadrature",
        (|| {
            let bubble = p.alpha_n().powf(p.two_star) * omega_n(n)? / (nf * nf);
            let via_quad = 2.0 * p.q / (p.two_star - p.q) * bubble / (2.0 * c_nq_quadrature(p)?);
            Ok(rel(via_quad, alpha_nq(p)?))
        })(),
        1e-8,
    ));
    checks.push(Check::new(
        "sobolev_two_routes",
        (|| Ok(rel(sobolev_sn2_from_critical_norm(n)?, sobolev_sn2(n)?)))(),
        1e-10,
    ));

    // Green identities at three interior points, worst case over points
    let points = green_points(n);
    let suites: Result<Vec<_>> = green.clone().and_then(|g| {
        points
            .iter()
            .map(|y| g.surface_identity_suite(y, opts.quad_order))
            .collect()
    });
    for name in [
        "boundary_pohozaev",
        "boundary_robin_gradient",
        "local_pohozaev",
        "local_gradient",
    ] {
        let worst = suites.as_ref().map_err(Clone::clone).map(|s| {
            s.iter()
                .map(|r| r.get(name).map_or(f64::INFINITY, |e| e.residual))
                .fold(0.0, f64::max)
        });
        checks.push(Check::new(&format!("green_{name}"), worst, 1e-6));
    }
    checks.push(Check::new(
        "green_representation",
        green.clone().and_then(|g| {
            points.iter().try_fold(0.0_f64, |m, x| {
                let (v, exact) = g.representation_check(x, opts.quad_order)?;
                Ok(m.max(rel(v, exact)))
            })
        }),
        1e-6,
    ));
    checks.push(Check::new(
        "robin_closed_form",
        green.clone().and_then(|g| {
            let c = 1.0 / ((nf - 2.0) * omega_n(n)?);
            points.iter().try_fold(0.0_f64, |m, y| {
                let y2: f64 = y.iter().map(|v| v * v).sum();
                Ok(m.max(rel(g.robin(y)?, c * (1.0 - y2).powf(2.0 - nf))))
            })
        }),
        1e-12,
    ));

    checks.push(Check::new("bubble_pde_residual", bubble_residual(p), 1e-6));
    checks.push(Check::new("kernel_dilation_residual", kernel_residual(p, false), 1e-6));
    checks.push(Check::new("kernel_translation_residual", kernel_residual(p, true), 1e-6));
    checks.push(Check::new(
        "projection_limit",
        green.clone().and_then(|g| projection_limit(p, &g)),
        1e-4,
    ));

    let sol = solve_eps_tilde(p, opts.eps_tilde, &ShootOptions::default());
    checks.push(Check::new(
        "nehari_residual",
        sol.as_ref().map(|s| s.nehari_residual).map_err(Clone::clone),
        1e-6,
    ));
    checks.push(Check::new(
        "pohozaev_residual",
        sol.as_ref().map(|s| s.pohozaev_residual).map_err(Clone::clone),
        1e-6,
    ));
    checks.push(Check::new(
        "blowup_target_n4_q3",
        (|| {
            let cell = Params::new(4, 3.0)?;
            let g = BallGreen::new(4, 1.0)?.with_constant_scale(opts.green_fault);
            Ok((alpha_nq(&cell)? * g.robin(&[0.0; 4])? - 24.0).abs() / 24.0)
        })(),
        1e-10,
    ));

    let all_pass = checks.iter().all(|c| c.pass);
    VerifyReport {
        n,
        q: p.q,
        green_fault: opts.green_fault,
        checks,
        all_pass,
    }
}

fn green_points(n: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    out[1][0] = 0.3;
    out[1][1] = 0.1;
    out[2][0] = -0.5;
    out[2][1] = 0.4;
    out
}

fn gamma_recurrence() -> Result<f64> {
    [0.3, 1.0, 1.7, 2.5, 4.2, 7.9].iter().try_fold(0.0_f64, |m, &x| {
        Ok(m.max(rel(x * gamma_fn(x)?, gamma_fn(x + 1.0)?)))
    })
}

fn gamma_half_integers() -> Result<f64> {
    // Γ(k + 1/2) = (2k)! √π / (4^k k!)
    let mut worst: f64 = 0.0;
    let mut exact = PI.sqrt();
    for k in 0..8 {
        worst = worst.max(rel(gamma_fn(k as f64 + 0.5)?, exact));
        exact *= k as f64 + 0.5;
    }
    Ok(worst)
}

fn sphere_area_recurrence() -> Result<f64> {
    // ω_{N+2} = 2π ω_N / N, seeded by ω_3 = 4π and ω_4 = 2π²
    let (mut odd, mut even) = (4.0 * PI, 2.0 * PI * PI);
    let mut worst: f64 = 0.0;
    for n in 3..=10 {
        let exact = if n % 2 == 1 { odd } else { even };
        worst = worst.max(rel(omega_n(n)?, exact));
        if n % 2 == 1 {
            odd *= 2.0 * PI / n as f64;
        } else {
            even *= 2.0 * PI / n as f64;
        }
    }
    Ok(worst)
}

fn bubble_residual(p: &Params) -> Result<f64> {
    let u = NormalizedBubble::new(p.n)?;
    let e = p.two_star - 1.0;
    Ok([0.4, 1.0, 2.5, 6.0].iter().fold(0.0_f64, |m, &r| {
        let res = radial_residual(p.n, |s| u.radial(s), |s| u.radial(s).powf(e - 1.0), r, 1e-4);
        m.max((res / u.radial(r).powf(e)).abs())
    }))
}

fn kernel_residual(p: &Params, translation: bool) -> Result<f64> {
    let nf = p.dim();
    let u = NormalizedBubble::new(p.n)?;
    let e = p.two_star - 1.0;
    let v = |s: f64| e * u.radial(s).powf(e - 1.0);
    let a = nf * (nf - 2.0);
    Ok([0.4, 1.0, 2.5, 6.0].iter().fold(0.0_f64, |m, &r| {
        let (res, scale) = if translation {
            // ψ_i = x_i g(r) reduces to the radial operator in dimension N + 2
            let g = |s: f64| (a + s * s).powf(-nf / 2.0);
            (radial_residual(p.n + 2, g, v, r, 1e-4), v(r) * g(r))
        } else {
            let f = |s: f64| kernel_radial_dilation(p.n, s);
            (radial_residual(p.n, f, v, r, 1e-4), v(r) * f(r).abs().max(1e-3 * f(0.0)))
        };
        m.max((res / scale).abs())
    }))
}

fn projection_limit(p: &Params, g: &BallGreen) -> Result<f64> {
    let n = p.n;
    let nf = p.dim();
    let proj = BallProjection::new(n, 1.0, 48)?;
    let mut x = vec![0.0; n];
    x[0] = 0.3;
    x[1] = -0.2;
    let origin = vec![0.0; n];
    let target = (nf - 2.0) * omega_n(n)? * g.regular_part(&origin, &x)?;
    let lam = 1000.0_f64;
    let b = Bubble::centered(n, lam)?;
    let v = lam.powf((nf - 2.0) / 2.0) * proj.harmonic_part(&b, &x)?;
    Ok(rel(v, target))
}
