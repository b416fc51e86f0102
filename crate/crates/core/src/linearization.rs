//! Spectra of the linearized operator, mode by mode.
//!
//! For the solution `u` on the unit ball and a spherical-harmonic degree
//! `ℓ`, the radial operator is
//!
//! ```text
//!     L_ℓ v = -v'' - (N-1)/r v' + ℓ(ℓ+N-2)/r² v - V(r) v,   v(1) = 0,
//!     V = (2*-1) u^{2*-2} + ε (q-1) u^{q-2}.
//! ```
//!
//! The discretization is a cell-centred finite-volume scheme on a mesh
//! graded toward the origin, where the solution concentrates. Scaling rows
//! and columns by the square roots of the cell volumes makes the matrix
//! exactly symmetric and tridiagonal, and eigenvalues are found by Sturm
//! bisection.
//!
//! Near the bubble limit two eigenvalues approach zero: the second radial
//! one (dilation) and the first `ℓ = 1` one (translations). Their values
//! are far below the discretization error of any mesh, so they are
//! recomputed by shooting on the deviation from the exact kernel of the
//! limit operator.

use rayon::prelude::*;
use serde::Serialize;

use crate::bubbles::NormalizedBubble;
use crate::ode::Dopri5;
use crate::quad::asinh_edges;
use crate::radial::RadialSolution;
use crate::roots::brent_with_values;
use crate::{Error, Params, Result};

/// Smallest admissible number of cells.
pub const MIN_GRID: usize = 256;
/// Default number of cells.
pub const DEFAULT_GRID: usize = 2048;
/// Default certificate threshold on the distance of the spectrum to zero.
pub const DEFAULT_TOL: f64 = 1e-3;
/// Largest relative eigenvalue shift accepted under grid doubling.
pub const DOUBLING_TOL: f64 = 1e-4;
/// Grid size beyond which [`spectrum`] stops doubling.
pub const MAX_GRID: usize = 65536;

/// `L_ℓ` on a fixed grid.
#[derive(Debug, Clone)]
pub struct ModeOperator<'a> {
    pub ell: usize,
    pub n_grid: usize,
    /// Cell centres in `(0, 1)`.
    pub grid: Vec<f64>,
    /// `V` at the cell centres, including any synthetic shift.
    pub potential: Vec<f64>,
    /// Constant added to the potential (zero for the true operator).
    pub shift: f64,
    pub diag: Vec<f64>,
    /// `off[i]` couples cells `i` and `i + 1`.
    pub off: Vec<f64>,
    params: Params,
    sol: &'a RadialSolution,
}

/// `ℓ(ℓ+N-2)`
pub fn centrifugal_coefficient(n: usize, ell: usize) -> f64 {
    (ell * (ell + n - 2)) as f64
}

/// `(2*-1) u^{2*-2} + ε (q-1) u^{q-2}` at `r`.
pub fn potential_at(p: &Params, sol: &RadialSolution, r: f64) -> f64 {
    let u = sol.u(r);
    if u <= 0.0 {
        return 0.0;
    }
    (p.two_star - 1.0) * u.powf(p.two_star - 2.0) + sol.eps * (p.q - 1.0) * u.powf(p.q - 2.0)
}

pub fn build_mode_operator<'a>(
    p: &Params,
    sol: &'a RadialSolution,
    ell: usize,
    n_grid: usize,
) -> Result<ModeOperator<'a>> {
    build_shifted(p, sol, ell, n_grid, 0.0)
}

/// Operator with the potential replaced by `V + shift`.
pub fn build_shifted<'a>(
    p: &Params,
    sol: &'a RadialSolution,
    ell: usize,
    n_grid: usize,
    shift: f64,
) -> Result<ModeOperator<'a>> {
    if n_grid < MIN_GRID {
        return Err(Error::Precondition(format!(
            "n_grid must be >= {MIN_GRID}, got {n_grid}"
        )));
    }
    let n = p.dim();
    let rt = sol.r_tilde;
    // graded in the scaled variable s = R̃ r, where the core has unit width
    let mut faces: Vec<f64> = asinh_edges(rt, 1.0, n_grid)
        .into_iter()
        .map(|s| s / rt)
        .collect();
    faces[0] = 0.0;
    faces[n_grid] = 1.0;

    let grid: Vec<f64> = faces.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let potential: Vec<f64> = grid
        .iter()
        .map(|&r| potential_at(p, sol, r) + shift)
        .collect();
    let vol: Vec<f64> = faces
        .windows(2)
        .map(|w| (w[1].powf(n) - w[0].powf(n)) / n)
        .collect();
    let cl = centrifugal_coefficient(p.n, ell);

    // transmissibilities of the interior faces and of the Dirichlet face
    let t_int: Vec<f64> = (0..n_grid - 1)
        .map(|i| faces[i + 1].powf(n - 1.0) / (grid[i + 1] - grid[i]))
        .collect();
    let t_out = 1.0 / (1.0 - grid[n_grid - 1]);

    let mut diag = vec![0.0; n_grid];
    for i in 0..n_grid {
        let mut a = 0.0;
        if i > 0 {
            a += t_int[i - 1];
        }
        a += if i + 1 < n_grid { t_int[i] } else { t_out };
        // ∫ s^{N-3} over the cell
        let cent = cl * (faces[i + 1].powf(n - 2.0) - faces[i].powf(n - 2.0)) / (n - 2.0);
        diag[i] = (a + cent) / vol[i] - potential[i];
    }
    let off: Vec<f64> = (0..n_grid - 1)
        .map(|i| -t_int[i] / (vol[i] * vol[i + 1]).sqrt())
        .collect();

    Ok(ModeOperator {
        ell,
        n_grid,
        grid,
        potential,
        shift,
        diag,
        off,
        params: *p,
        sol,
    })
}

impl<'a> ModeOperator<'a> {
    /// Number of eigenvalues below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        sturm_count(&self.diag, &self.off, x)
    }

    /// The `k` smallest eigenvalues of the matrix, ascending.
    pub fn smallest_eigenvalues(&self, k: usize) -> Vec<f64> {
        smallest_eigenvalues(&self.diag, &self.off, k)
    }

    fn refined_index(&self) -> Option<usize> {
        match self.ell {
            0 => Some(1),
            1 => Some(0),
            _ => None,
        }
    }
}

/// Negative pivots of the `LDLᵀ` factorization of `T - x I`.
pub fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for i in 0..diag.len() {
        let b2 = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        d = diag[i] - x - if i == 0 { 0.0 } else { b2 / d };
        if d == 0.0 {
            d = -f64::MIN_POSITIVE;
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// The `k` smallest eigenvalues of a symmetric tridiagonal matrix.
pub fn smallest_eigenvalues(diag: &[f64], off: &[f64], k: usize) -> Vec<f64> {
    let n = diag.len();
    let k = k.min(n);
    // Gershgorin bounds
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    (0..k)
        .map(|idx| {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b || b - a <= 2.0 * f64::EPSILON * a.abs().max(b.abs()) {
                    break;
                }
                if sturm_count(diag, off, m) > idx {
                    b = m;
                } else {
                    a = m;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}

/// The low end of the spectrum of one mode.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub ell: usize,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub min_abs: f64,
    pub converged: bool,
    /// Largest relative shift of the mesh eigenvalues under doubling.
    pub doubling_shift: f64,
    /// Finest grid used.
    pub n_grid_used: usize,
    /// Index recomputed by shooting, if any.
    pub refined_index: Option<usize>,
}

/// The `k` smallest eigenvalues of `op`, validated by grid doubling and
/// with the near-kernel eigenvalue refined by shooting.
///
/// The grid is doubled until the mesh eigenvalues move by at most
/// [`DOUBLING_TOL`] (relative, floored at one) or [`MAX_GRID`] is reached;
/// the values from the finest grid are reported.
pub fn spectrum(op: &ModeOperator<'_>, k: usize) -> Result<SpectrumReport> {
    if k < 2 {
        return Err(Error::Precondition(format!("k must be >= 2, got {k}")));
    }
    let refined = op.refined_index().filter(|&i| i < k);
    let shift_between = |coarse: &[f64], fine: &[f64]| {
        (0..k)
            .filter(|&i| Some(i) != refined)
            // normalized by the unshifted value so a shift cannot alter the grid path
            .map(|i| (fine[i] - coarse[i]).abs() / (fine[i] + op.shift).abs().max(1.0))
            .fold(0.0_f64, f64::max)
    };
    let mut coarse = op.smallest_eigenvalues(k);
    let mut n_used = op.n_grid;
    let (ev, doubling_shift) = loop {
        n_used *= 2;
        let fine = build_shifted(&op.params, op.sol, op.ell, n_used, op.shift)?.smallest_eigenvalues(k);
        let shift = shift_between(&coarse, &fine);
        if shift <= DOUBLING_TOL || 2 * n_used > MAX_GRID.max(2 * op.n_grid) {
            break (fine, shift);
        }
        coarse = fine;
    };
    let mut ev = ev;
    let mut converged = doubling_shift <= DOUBLING_TOL;
    if let Some(i) = refined {
        match refine_eigenvalue(&op.params, op.sol, op.ell, i, ev[i] + op.shift) {
            Ok(v) => ev[i] = v - op.shift,
            Err(_) => converged = false,
        }
    }
    ev.sort_by(f64::total_cmp);
    let min_abs = ev.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    Ok(SpectrumReport {
        ell: op.ell,
        eigenvalues: ev,
        min_abs,
        converged,
        doubling_shift,
        n_grid_used: n_used,
        refined_index: refined,
    })
}

/// Limit-kernel profile for the refined modes, in the scaled variable.
fn kernel(b: &NormalizedBubble, a: f64, nm2: f64, ell: usize, s: f64) -> f64 {
    let u = b.radial(s);
    if ell == 0 {
        0.5 * nm2 * u * (a - s * s) / (a + s * s)
    } else {
        nm2 * s * u / (a + s * s)
    }
}

struct Shot {
    end_value: f64,
    nodes: usize,
}

/// Eigenvalue with index `index` of mode `ell ∈ {0, 1}` by shooting.
///
/// The eigenfunction is written as `W + δ`, with `W` the kernel of the
/// limit operator, and `δ` is integrated under relative error control.
/// The index is enforced by counting nodes, and `guess` only seeds the
/// bracket search.
pub fn refine_eigenvalue(
    p: &Params,
    sol: &RadialSolution,
    ell: usize,
    index: usize,
    guess: f64,
) -> Result<f64> {
    if ell > 1 {
        return Err(Error::Precondition(format!(
            "shooting refinement covers ℓ = 0 and 1, got {ell}"
        )));
    }
    let shot = sol.shoot_result();
    let rt = sol.r_tilde;
    let et = sol.eps_tilde;
    let n = p.dim();
    let nm2 = n - 2.0;
    let a = n * nm2;
    let cl = centrifugal_coefficient(p.n, ell);
    let pw = p.two_star - 2.0;
    let bubble = NormalizedBubble::new(p.n)?;
    let r0 = 1e-4_f64.min(0.01 * rt);
    let scale = rt * rt;

    let run = |lam_unit: f64| -> Result<Shot> {
        let lam = lam_unit / scale;
        let dv0 = et * (p.q - 1.0);
        let (y0, dy0, w_at) = if ell == 0 {
            let w0 = 0.5 * nm2;
            let d = -(lam + dv0) * w0 / (2.0 * n);
            (d * r0 * r0, 2.0 * d * r0, w0)
        } else {
            let w1 = nm2 / a;
            let d = -(lam + dv0) * w1 / (2.0 * n + 4.0);
            (d * r0.powi(3), 3.0 * d * r0 * r0, w1)
        };
        let _ = w_at;
        let rhs = |s: f64, y: &[f64; 2]| -> [f64; 2] {
            let ub = bubble.radial(s);
            let (z, _) = shot.deviation(s);
            let ut = (ub + z).max(0.0);
            let (v, dv) = if ut > 0.0 {
                let lq = et * (p.q - 1.0) * ut.powf(p.q - 2.0);
                let diff = ub.powf(pw) * (pw * (z / ub).max(-1.0).ln_1p()).exp_m1();
                ((p.two_star - 1.0) * ut.powf(pw) + lq, (p.two_star - 1.0) * diff + lq)
            } else {
                (0.0, -(p.two_star - 1.0) * ub.powf(pw))
            };
            let w = kernel(&bubble, a, nm2, ell, s);
            [
                y[1],
                -(n - 1.0) / s * y[1] + cl / (s * s) * y[0] - v * y[0] - lam * (w + y[0]) - dv * w,
            ]
        };
        let integ = Dopri5::<2>::new(1e-12, [1e-300; 2])
            .with_initial_step(0.1 * r0)
            .integrate(rhs, r0, [y0, dy0], rt, None::<fn(f64, &[f64; 2]) -> f64>)?;
        let mut nodes = 0;
        let mut prev = kernel(&bubble, a, nm2, ell, r0) + y0;
        for (s, y) in integ.trajectory.mesh().into_iter().skip(1) {
            let phi = kernel(&bubble, a, nm2, ell, s) + y[0];
            if phi != 0.0 && prev != 0.0 && phi.signum() != prev.signum() {
                nodes += 1;
            }
            if phi != 0.0 {
                prev = phi;
            }
        }
        let y = integ.trajectory.y_end();
        let end_value = kernel(&bubble, a, nm2, ell, rt) + y[0];
        Ok(Shot { end_value, nodes })
    };

    // bracket with exactly `index` eigenvalues below `lo` and one inside
    let mut w = guess.abs().max(1.0);
    let mut lo = guess - w;
    let mut hi = guess + w;
    let mut s_lo = run(lo)?;
    let mut s_hi = run(hi)?;
    for _ in 0..60 {
        if s_lo.nodes <= index {
            break;
        }
        w *= 2.0;
        lo -= w;
        s_lo = run(lo)?;
    }
    for _ in 0..60 {
        if s_hi.nodes > index {
            break;
        }
        w *= 2.0;
        hi += w;
        s_hi = run(hi)?;
    }
    if s_lo.nodes > index || s_hi.nodes <= index {
        return Err(Error::NoConvergence(format!(
            "no bracket for eigenvalue {index} of mode {ell}"
        )));
    }
    for _ in 0..200 {
        if s_lo.nodes == index && s_hi.nodes == index + 1 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let s_mid = run(mid)?;
        if s_mid.nodes <= index {
            lo = mid;
            s_lo = s_mid;
        } else {
            hi = mid;
            s_hi = s_mid;
        }
    }
    if !(s_lo.nodes == index && s_hi.nodes == index + 1) {
        return Err(Error::NoConvergence(format!(
            "could not isolate eigenvalue {index} of mode {ell}"
        )));
    }
    let mut failure = None;
    let root = brent_with_values(
        |lam| match run(lam) {
            Ok(s) => s.end_value,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        lo,
        hi,
        s_lo.end_value,
        s_hi.end_value,
        0.0,
        300,
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(root),
    }
}

/// Outcome of [`nondegeneracy_certificate`].
#[derive(Debug, Clone, Serialize)]
pub struct NondegeneracyCertificate {
    pub nondegenerate: bool,
    pub tol: f64,
    pub min_abs: f64,
    pub modes: Vec<SpectrumReport>,
    /// `min_abs` strictly increases with `ℓ` from `ℓ = 2` on, so higher
    /// modes cannot approach zero.
    pub monotone_tail: bool,
    pub all_converged: bool,
}

/// Checks that no mode `ℓ ≤ ell_max` has an eigenvalue within `tol` of 0.
pub fn nondegeneracy_certificate(
    p: &Params,
    sol: &RadialSolution,
    ell_max: usize,
    tol: f64,
) -> Result<NondegeneracyCertificate> {
    certificate_with(p, sol, ell_max, tol, DEFAULT_GRID, 0.0)
}

pub fn certificate_with(
    p: &Params,
    sol: &RadialSolution,
    ell_max: usize,
    tol: f64,
    n_grid: usize,
    shift: f64,
) -> Result<NondegeneracyCertificate> {
    if ell_max < 2 {
        return Err(Error::Precondition(format!("ell_max must be >= 2, got {ell_max}")));
    }
    let modes = (0..=ell_max)
        .map(|ell| spectrum(&build_shifted(p, sol, ell, n_grid, shift)?, 4))
        .collect::<Result<Vec<_>>>()?;
    let min_abs = modes.iter().fold(f64::INFINITY, |m, r| m.min(r.min_abs));
    let monotone_tail = modes[2..].windows(2).all(|w| w[1].min_abs > w[0].min_abs);
    Ok(NondegeneracyCertificate {
        nondegenerate: min_abs >= tol,
        tol,
        min_abs,
        all_converged: modes.iter().all(|m| m.converged),
        monotone_tail,
        modes,
    })
}

/// [`nondegeneracy_certificate`] for each solution, on `jobs` threads
/// (`0` means the rayon default). Output order follows `sols`.
pub fn certificates(
    p: &Params,
    sols: &[RadialSolution],
    ell_max: usize,
    tol: f64,
    jobs: usize,
) -> Result<Vec<Result<NondegeneracyCertificate>>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Precondition(format!("thread pool: {e}")))?;
    Ok(pool.install(|| {
        sols.par_iter()
            .map(|s| nondegeneracy_certificate(p, s, ell_max, tol))
            .collect()
    }))
}

/// A positive shift of the potential that moves the lowest radial
/// eigenvalue not covered by refinement exactly onto zero.
///
/// Bisection runs on the grid that [`spectrum`] settles on for the radial
/// mode, so `certificate_with(.., n_grid, shift)` sees the zero mode.
pub fn degenerate_shift(p: &Params, sol: &RadialSolution, n_grid: usize) -> Result<f64> {
    const INDEX: usize = 2;
    let report = spectrum(&build_mode_operator(p, sol, 0, n_grid)?, 4)?;
    let fine = build_mode_operator(p, sol, 0, report.n_grid_used)?;
    let target = fine.smallest_eigenvalues(INDEX + 1)[INDEX];
    if !(target > 0.0) {
        return Err(Error::NoConvergence(format!(
            "radial eigenvalue {INDEX} is not positive ({target})"
        )));
    }
    let (mut lo, mut hi) = (0.0, 2.0 * target);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        // eigenvalue INDEX has crossed below zero once INDEX + 1 lie below it
        if build_shifted(p, sol, 0, report.n_grid_used, mid)?.count_below(0.0) > INDEX {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::{solve_eps_tilde, ShootOptions};

    fn solution(n: usize, q: f64, et: f64) -> (Params, RadialSolution) {
        let p = Params::new(n, q).unwrap();
        let s = solve_eps_tilde(&p, et, &ShootOptions::default()).unwrap();
        (p, s)
    }

    #[test]
    fn sturm_count_on_known_matrix() {
        // 1D Dirichlet Laplacian: eigenvalues 2 - 2cos(kπ/(n+1))
        let n = 50;
        let d = vec![2.0; n];
        let o = vec![-1.0; n - 1];
        let ev = smallest_eigenvalues(&d, &o, 3);
        for (k, v) in ev.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((v - exact).abs() < 1e-13, "{v} {exact}");
        }
    }

    #[test]
    fn coefficients_and_potential_peak() {
        let (p, s) = solution(5, 3.0, 1e-3);
        assert_eq!(centrifugal_coefficient(5, 0), 0.0);
        assert_eq!(centrifugal_coefficient(5, 1), 4.0);
        let expect = (p.two_star - 1.0) * s.mu.powf(p.two_star - 2.0) + s.eps * (p.q - 1.0) * s.mu.powf(p.q - 2.0);
        let got = potential_at(&p, &s, 0.0);
        assert!((got / expect - 1.0).abs() < 1e-12);
        let op = build_mode_operator(&p, &s, 2, 512).unwrap();
        assert!(op.potential.iter().all(|&v| v >= 0.0));
        assert!(build_mode_operator(&p, &s, 0, 100).is_err());
    }

    #[test]
    fn zero_potential_matches_bessel_zeros() {
        // with V = 0 and ε = 0 the ℓ = 0 eigenvalues on the unit ball in
        // N = 3 are (kπ)²
        let (p, s) = solution(3, 5.0, 1e-2);
        let mut op = build_mode_operator(&p, &s, 0, 2048).unwrap();
        for i in 0..op.n_grid {
            op.diag[i] += op.potential[i];
        }
        let ev = op.smallest_eigenvalues(2);
        let pi2 = std::f64::consts::PI.powi(2);
        assert!((ev[0] / pi2 - 1.0).abs() < 1e-3, "{ev:?}");
        assert!((ev[1] / (4.0 * pi2) - 1.0).abs() < 1e-3, "{ev:?}");
    }

    #[test]
    fn refinement_agrees_with_mesh_at_moderate_eps() {
        let (p, s) = solution(5, 3.0, 1e-1);
        for ell in 0..2 {
            let fine = build_mode_operator(&p, &s, ell, 8192).unwrap();
            let idx = if ell == 0 { 1 } else { 0 };
            let fv = fine.smallest_eigenvalues(2)[idx];
            let sh = refine_eigenvalue(&p, &s, ell, idx, fv).unwrap();
            assert!((sh - fv).abs() < 1e-3 * fv.abs().max(1.0), "ℓ={ell}: {sh} vs {fv}");
        }
    }

    #[test]
    fn translation_eigenvalue_matches_boundary_flux() {
        // λ ≈ N u'(1)² / ∫ u'² r^{N-1} dr once the core is well separated
        // from the boundary; the ratio tends to one
        let mut prev = f64::INFINITY;
        for &et in &[1e-3, 1e-5, 1e-7] {
            let (p, s) = solution(5, 3.0, et);
            let guess = build_mode_operator(&p, &s, 1, 1024).unwrap().smallest_eigenvalues(1)[0];
            let lam = refine_eigenvalue(&p, &s, 1, 0, guess).unwrap();
            let omega = crate::constants::omega_n(5).unwrap();
            let flux = p.dim() * s.du(1.0).powi(2) / (s.grad_sq / omega);
            let dev = (lam / flux - 1.0).abs();
            assert!(dev < prev, "ε̃={et}: {lam} vs {flux}");
            prev = dev;
        }
        assert!(prev < 1e-5, "{prev}");
    }

    #[test]
    fn spectral_signatures_along_sweep() {
        let mut prev_l1 = f64::INFINITY;
        let mut first_l2 = None;
        for &et in &[1e-2, 1e-4, 1e-6] {
            let (p, s) = solution(5, 3.0, et);
            let r0 = spectrum(&build_mode_operator(&p, &s, 0, 1024).unwrap(), 3).unwrap();
            assert!(r0.eigenvalues[0] < 0.0);
            let r1 = spectrum(&build_mode_operator(&p, &s, 1, 1024).unwrap(), 3).unwrap();
            let l1 = r1.eigenvalues.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
            assert!(l1 < prev_l1, "ℓ=1 not shrinking: {l1} after {prev_l1}");
            prev_l1 = l1;
            let r2 = spectrum(&build_mode_operator(&p, &s, 2, 1024).unwrap(), 3).unwrap();
            assert!(r2.converged);
            let v2 = *first_l2.get_or_insert(r2.min_abs);
            assert!(r2.min_abs > 0.5 * v2 && r2.min_abs > 10.0);
            for (a, b) in r1.eigenvalues.iter().zip(&r2.eigenvalues) {
                assert!(b > a);
            }
        }
    }

    #[test]
    fn synthetic_degenerate_potential_is_rejected() {
        let (p, s) = solution(5, 3.0, 1e-2);
        let c = degenerate_shift(&p, &s, 512).unwrap();
        assert!(c > 0.0);
        let cert = certificate_with(&p, &s, 2, 1e-3, 512, c).unwrap();
        assert!(!cert.nondegenerate, "min_abs = {}", cert.min_abs);
        assert!(cert.modes[0].min_abs < 1e-6);
        let honest = certificate_with(&p, &s, 2, 1e-3, 512, 0.0).unwrap();
        assert!(honest.nondegenerate, "min_abs = {}", honest.min_abs);
    }
}
