//! Green's function of `-Δ` with Dirichlet data on `B(0, R)`.
//!
//! `G(x,y) = S(x,y) - H(x,y)` with `S = c|x-y|^{2-N}` and `c = 1/((N-2)ω_N)`.
//! By the method of images `H(x,y) = c R^{N-2} D^{2-N}` where
//! `D² = |x|²|y|² - 2R² x·y + R⁴`, which is smooth up to the diagonal and
//! is evaluated directly there rather than as `S - G`.

use serde::Serialize;

use crate::constants::omega_n;
use crate::geom::{dist2, dot, frame, norm, norm2, sub};
use crate::quad::{GaussLegendre, SphereRule};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallGreen {
    n: usize,
    radius: f64,
    c: f64,
}

impl BallGreen {
    pub fn new(n: usize, radius: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::Domain(format!("N must be >= 3, got {n}")));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Domain(format!("radius must be > 0, got {radius}")));
        }
        let c = 1.0 / ((n as f64 - 2.0) * omega_n(n)?);
        Ok(Self { n, radius, c })
    }

    /// Multiplies the normalizing constant; used to check that the identity
    /// suite notices a wrong constant.
    pub fn with_constant_scale(mut self, scale: f64) -> Self {
        self.c *= scale;
        self
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// `1/((N-2)ω_N)` (times any injected scale).
    pub fn constant(&self) -> f64 {
        self.c
    }

    fn inside(&self, x: &[f64], strict: bool) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::Domain(format!("expected a point in R^{}, got R^{}", self.n, x.len())));
        }
        let r = norm(x);
        let bad = if strict { r >= self.radius } else { r > self.radius * (1.0 + 1e-14) };
        if bad || !r.is_finite() {
            return Err(Error::Domain(format!(
                "|x| = {r} is not inside the ball of radius {}",
                self.radius
            )));
        }
        Ok(())
    }

    fn image_d2(&self, x: &[f64], y: &[f64]) -> f64 {
        let r2 = self.radius * self.radius;
        // |x|²|y|² - 2R² x·y + R⁴ = | |y| x - R² y/|y| |², nonnegative
        (norm2(x) * norm2(y) - 2.0 * r2 * dot(x, y) + r2 * r2).max(0.0)
    }

    fn rn2(&self) -> f64 {
        self.radius.powi(self.n as i32 - 2)
    }

    /// `S(x,y) = c|x-y|^{2-N}`
    pub fn singular(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let d2 = dist2(x, y);
        if d2 == 0.0 {
            return Err(Error::Singular("S(x,y) is singular at x = y".into()));
        }
        Ok(self.c * d2.powf((2.0 - self.n as f64) / 2.0))
    }

    /// `H(x,y)`, defined on the closed ball including the diagonal.
    pub fn regular_part(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.inside(x, false)?;
        self.inside(y, false)?;
        let d2 = self.image_d2(x, y);
        if d2 == 0.0 {
            return Err(Error::Singular("H(x,y) is singular for x = y on the boundary".into()));
        }
        Ok(self.c * self.rn2() * d2.powf((2.0 - self.n as f64) / 2.0))
    }

    /// `G(x,y)`; zero when either point is on the boundary.
    pub fn green(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.inside(x, false)?;
        self.inside(y, false)?;
        Ok(self.singular(x, y)? - self.regular_part(x, y)?)
    }

    /// `R(x) = H(x,x) = c((R²-|x|²)/R)^{2-N}`
    pub fn robin(&self, x: &[f64]) -> Result<f64> {
        self.inside(x, true)?;
        let t = (self.radius * self.radius - norm2(x)) / self.radius;
        Ok(self.c * t.powf(2.0 - self.n as f64))
    }

    pub fn robin_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.inside(x, true)?;
        let n = self.n as f64;
        let t = (self.radius * self.radius - norm2(x)) / self.radius;
        let k = 2.0 * self.c * (n - 2.0) * t.powf(1.0 - n) / self.radius;
        Ok(x.iter().map(|v| k * v).collect())
    }

    /// `∇_x H(x,y)`
    pub fn regular_part_gradient(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        self.inside(x, false)?;
        self.inside(y, false)?;
        let n = self.n as f64;
        let d2 = self.image_d2(x, y);
        if d2 == 0.0 {
            return Err(Error::Singular("∇H is singular for x = y on the boundary".into()));
        }
        let k = self.c * (2.0 - n) * self.rn2() * d2.powf(-n / 2.0);
        let (y2, r2) = (norm2(y), self.radius * self.radius);
        Ok(x.iter().zip(y).map(|(xi, yi)| k * (y2 * xi - r2 * yi)).collect())
    }

    /// `∇_x G(x,y)`
    pub fn green_gradient(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        let d2 = dist2(x, y);
        if d2 == 0.0 {
            return Err(Error::Singular("∇G is singular at x = y".into()));
        }
        let gh = self.regular_part_gradient(x, y)?;
        let k = self.c * (2.0 - self.n as f64) * d2.powf(-(self.n as f64) / 2.0);
        Ok(x.iter()
            .zip(y)
            .zip(gh)
            .map(|((xi, yi), h)| k * (xi - yi) - h)
            .collect())
    }

    /// Evaluates the boundary and local surface identities at `y`.
    pub fn surface_identity_suite(&self, y: &[f64], quad_order: usize) -> Result<SurfaceIdentityReport> {
        if quad_order < 16 {
            return Err(Error::Precondition(format!("quad_order must be >= 16, got {quad_order}")));
        }
        self.inside(y, true)?;
        let fine = self.identities(y, quad_order)?;
        let coarse = self.identities(y, quad_order / 2)?;
        let entries: Vec<IdentityResidual> = fine
            .into_iter()
            .zip(coarse)
            .map(|(mut f, c)| {
                // converged if refining did not make things worse, or both
                // levels are already at roundoff
                f.converged = f.residual <= c.residual.max(1e-12) * 1.5;
                f
            })
            .collect();
        let max_residual = entries.iter().map(|e| e.residual).fold(0.0, f64::max);
        Ok(SurfaceIdentityReport {
            y: y.to_vec(),
            quad_order,
            entries,
            max_residual,
        })
    }

    fn identities(&self, y: &[f64], order: usize) -> Result<Vec<IdentityResidual>> {
        let n = self.n;
        let rule = SphereRule::new(n, order);
        let origin = vec![0.0; n];
        let fr = frame(n, y, &origin);
        let robin = self.robin(y)?;
        let grad_r = self.robin_gradient(y)?;
        let nf = n as f64;
        let mut failure: Option<Error> = None;
        let mut record = |r: Result<Vec<f64>>| -> Vec<f64> {
            match r {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    vec![0.0; n]
                }
            }
        };

        // boundary of the ball
        let mut grads = Vec::with_capacity(rule.points().len());
        rule.integrate(&origin, self.radius, &fr, |xi, _| {
            grads.push(record(self.green_gradient(xi, y)));
            0.0
        });
        let mut it = grads.iter();
        let poh = rule.integrate(&origin, self.radius, &fr, |xi, nrm| {
            let dn = dot(it.next().unwrap(), nrm);
            dot(&sub(xi, y), nrm) * dn * dn
        });
        let mut it = grads.iter();
        let grad_id = rule.integrate_vec(&origin, self.radius, &fr, |_, nrm| {
            let dn = dot(it.next().unwrap(), nrm);
            nrm.iter().map(|v| dn * dn * v).collect()
        });

        // small sphere around y
        let d = 0.5 * (self.radius - norm(y));
        let mut local = Vec::with_capacity(rule.points().len());
        rule.integrate(y, d, &fr, |xi, _| {
            local.push((record(self.green_gradient(xi, y)), self.green(xi, y).unwrap_or(0.0)));
            0.0
        });
        let mut it = local.iter();
        let local_poh = rule.integrate(y, d, &fr, |xi, nrm| {
            let (g, gv) = it.next().unwrap();
            let z = sub(xi, y);
            let dn = dot(g, nrm);
            -dn * dot(&z, g) + 0.5 * dot(&z, nrm) * norm2(g) - (nf - 2.0) / 2.0 * gv * dn
        });
        let mut it = local.iter();
        let local_grad = rule.integrate_vec(y, d, &fr, |_, nrm| {
            let (g, _) = it.next().unwrap();
            let dn = dot(g, nrm);
            let g2 = norm2(g);
            g.iter().zip(nrm).map(|(gi, ni)| dn * gi - 0.5 * g2 * ni).collect()
        });
        if let Some(e) = failure {
            return Err(e);
        }

        let h_yy = self.regular_part(y, y)?;
        let half_grad: Vec<f64> = grad_r.iter().map(|v| 0.5 * v).collect();
        Ok(vec![
            IdentityResidual::new("boundary_pohozaev", vec![poh], vec![(nf - 2.0) * robin], robin),
            IdentityResidual::new("boundary_robin_gradient", grad_id, grad_r, robin),
            IdentityResidual::new("local_pohozaev", vec![local_poh], vec![-(nf - 2.0) / 2.0 * h_yy], robin),
            IdentityResidual::new("local_gradient", local_grad, half_grad, robin),
        ])
    }

    /// `(∫_B G(x,y) 2N dy, R² - |x|²)`: the Green representation of the
    /// solution of `-Δu = 2N`, `u|∂B = 0`, computed in polar coordinates
    /// centred at `x` so the weak singularity is absorbed by the Jacobian.
    pub fn representation_check(&self, x: &[f64], order: usize) -> Result<(f64, f64)> {
        self.inside(x, true)?;
        let n = self.n;
        let nf = n as f64;
        let rule = SphereRule::new(n, order);
        let gl = GaussLegendre::new(order);
        let fr = frame(n, x, &vec![0.0; n]);
        let r2 = self.radius * self.radius;
        let x2 = norm2(x);
        let mut failure = None;
        let value = rule.integrate(x, 1.0, &fr, |_, w| {
            let xw = dot(x, w);
            let rho_max = -xw + (xw * xw + r2 - x2).sqrt();
            gl.integrate(0.0, rho_max, |rho| {
                let y: Vec<f64> = x.iter().zip(w).map(|(a, b)| a + rho * b).collect();
                match self.green(x, &y) {
                    Ok(g) => 2.0 * nf * g * rho.powi(n as i32 - 1),
                    Err(e) => {
                        failure.get_or_insert(e);
                        0.0
                    }
                }
            })
        });
        if let Some(e) = failure {
            return Err(e);
        }
        Ok((value, r2 - x2))
    }
}

/// One surface identity: computed value, closed-form right-hand side and
/// relative residual `|lhs - rhs| / max(|rhs|, R(y))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityResidual {
    pub name: &'static str,
    pub computed: Vec<f64>,
    pub expected: Vec<f64>,
    pub residual: f64,
    pub converged: bool,
}

impl IdentityResidual {
    fn new(name: &'static str, computed: Vec<f64>, expected: Vec<f64>, robin: f64) -> Self {
        let diff: Vec<f64> = computed.iter().zip(&expected).map(|(a, b)| a - b).collect();
        let scale = norm(&expected).max(robin);
        Self {
            name,
            residual: norm(&diff) / scale,
            computed,
            expected,
            converged: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurfaceIdentityReport {
    pub y: Vec<f64>,
    pub quad_order: usize,
    pub entries: Vec<IdentityResidual>,
    pub max_residual: f64,
}

impl SurfaceIdentityReport {
    pub fn all_converged(&self) -> bool {
        self.entries.iter().all(|e| e.converged)
    }

    pub fn get(&self, name: &str) -> Option<&IdentityResidual> {
        self.entries.iter().find(|e| e.name == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn e1(n: usize, t: f64) -> Vec<f64> {
        let mut v = vec![0.0; n];
        v[0] = t;
        v
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn robin_closed_forms() {
        let g3 = BallGreen::new(3, 1.0).unwrap();
        assert!(rel(g3.robin(&[0.0; 3]).unwrap(), 1.0 / (4.0 * PI)) < 1e-14);
        assert!(rel(g3.robin(&e1(3, 0.5)).unwrap(), 1.0 / (3.0 * PI)) < 1e-14);
        let g4 = BallGreen::new(4, 1.0).unwrap();
        assert!(rel(g4.robin(&[0.0; 4]).unwrap(), 1.0 / (4.0 * PI * PI)) < 1e-14);
        assert!(g3.robin(&e1(3, 1.0)).is_err());
        assert!(BallGreen::new(2, 1.0).is_err());
        assert!(BallGreen::new(3, 0.0).is_err());
    }

    #[test]
    fn robin_is_diagonal_of_regular_part() {
        for n in 3..=6 {
            let g = BallGreen::new(n, 1.7).unwrap();
            for t in [0.0, 0.4, 1.2, 1.6] {
                let x: Vec<f64> = (0..n).map(|k| if k == 1 { t } else { 0.01 * k as f64 }).collect();
                assert!(rel(g.regular_part(&x, &x).unwrap(), g.robin(&x).unwrap()) < 1e-12);
            }
        }
        let g = BallGreen::new(3, 1.0).unwrap();
        assert!(rel(g.regular_part(&[0.0; 3], &[0.0; 3]).unwrap(), 1.0 / (4.0 * PI)) < 1e-14);
    }

    #[test]
    fn green_at_origin_n3() {
        let g = BallGreen::new(3, 1.0).unwrap();
        for t in [0.1, 0.5, 0.9] {
            let x = [0.0, t, 0.0];
            let expected = (1.0 / t - 1.0) / (4.0 * PI);
            assert!(rel(g.green(&x, &[0.0; 3]).unwrap(), expected) < 1e-13);
        }
        assert!(matches!(g.green(&[0.2; 3], &[0.2; 3]), Err(Error::Singular(_))));
        assert!(matches!(g.green(&[2.0, 0.0, 0.0], &[0.0; 3]), Err(Error::Domain(_))));
    }

    #[test]
    fn green_vanishes_on_boundary() {
        for n in 3..=5 {
            let g = BallGreen::new(n, 2.0).unwrap();
            let y: Vec<f64> = (0..n).map(|k| 0.3 - 0.1 * k as f64).collect();
            let mut x: Vec<f64> = (0..n).map(|k| (k as f64 + 1.0).sin()).collect();
            let s = 2.0 / norm(&x);
            x.iter_mut().for_each(|v| *v *= s);
            let gv = g.green(&x, &y).unwrap();
            assert!(gv.abs() < 1e-13 * g.singular(&x, &y).unwrap());
        }
    }

    #[test]
    fn green_and_regular_part_are_harmonic() {
        let g = BallGreen::new(4, 1.0).unwrap();
        let y = [0.2, -0.1, 0.3, 0.0];
        let x = [-0.4, 0.3, 0.1, 0.2];
        let h = 1e-3;
        let lap = |f: &dyn Fn(&[f64]) -> f64| {
            let mut acc = -2.0 * 4.0 * f(&x);
            for k in 0..4 {
                let mut p = x;
                p[k] += h;
                let mut m = x;
                m[k] -= h;
                acc += f(&p) + f(&m);
            }
            acc / (h * h)
        };
        let gx = g.green(&x, &y).unwrap();
        // second-difference truncation error relative to the curvature scale
        assert!(lap(&|p| g.green(p, &y).unwrap()).abs() < 1e-4 * gx / dist2(&x, &y));
        assert!(lap(&|p| g.regular_part(&y, p).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let g = BallGreen::new(5, 1.3).unwrap();
        let y = [0.2, -0.1, 0.3, 0.0, 0.1];
        let x = [-0.4, 0.3, 0.1, 0.2, -0.2];
        let gg = g.green_gradient(&x, &y).unwrap();
        let rg = g.robin_gradient(&x).unwrap();
        for k in 0..5 {
            let h = 1e-6;
            let mut p = x;
            p[k] += h;
            let mut m = x;
            m[k] -= h;
            let fd = (g.green(&p, &y).unwrap() - g.green(&m, &y).unwrap()) / (2.0 * h);
            assert!((gg[k] - fd).abs() < 1e-6 * norm(&gg), "k={k}");
            let fd = (g.robin(&p).unwrap() - g.robin(&m).unwrap()) / (2.0 * h);
            assert!((rg[k] - fd).abs() < 1e-6 * norm(&rg), "k={k}");
        }
        assert!(g.robin_gradient(&[0.0; 5]).unwrap().iter().all(|v| *v == 0.0));
        // radially outward
        assert!(dot(&rg, &x) > 0.0);
    }

    #[test]
    fn robin_boundary_blowup_rate() {
        for n in [3usize, 4, 6] {
            let g = BallGreen::new(n, 1.0).unwrap();
            let om = omega_n(n).unwrap();
            let mut prev = f64::INFINITY;
            for d in [1e-1, 1e-2, 1e-3, 1e-4] {
                let v = g.robin(&e1(n, 1.0 - d)).unwrap() * (2.0 * d).powi(n as i32 - 2) * (n as f64 - 2.0) * om;
                let err = (v - 1.0).abs();
                assert!(err < prev);
                prev = err;
            }
            assert!(prev < 1e-3 * (n as f64));
        }
    }

    #[test]
    fn green_bound_on_ball() {
        let g = BallGreen::new(3, 1.0).unwrap();
        for (x, y) in [([0.1, 0.2, 0.3], [-0.5, 0.1, 0.0]), ([0.9, 0.0, 0.0], [0.89, 0.01, 0.0])] {
            let gv = g.green(&x, &y).unwrap();
            assert!(gv > 0.0 && gv <= g.singular(&x, &y).unwrap());
        }
    }

    #[test]
    fn surface_identities_hold() {
        for n in [3usize, 4, 5] {
            let g = BallGreen::new(n, 1.0).unwrap();
            for t in [0.0, 0.3, 0.6] {
                let rep = g.surface_identity_suite(&e1(n, t), 64).unwrap();
                assert!(rep.max_residual < 1e-6, "N={n} t={t}: {rep:?}");
                assert!(rep.all_converged());
            }
        }
    }

    #[test]
    fn surface_identity_values_at_center() {
        let g = BallGreen::new(3, 1.0).unwrap();
        let rep = g.surface_identity_suite(&[0.0; 3], 64).unwrap();
        let poh = rep.get("boundary_pohozaev").unwrap();
        assert!(rel(poh.computed[0], 1.0 / (4.0 * PI)) < 1e-10);
        let grad = rep.get("boundary_robin_gradient").unwrap();
        assert!(norm(&grad.computed) < 1e-12);
        let local = rep.get("local_pohozaev").unwrap();
        assert!(rel(local.computed[0], -0.5 / (4.0 * PI)) < 1e-10);
    }

    #[test]
    fn wrong_constant_is_detected() {
        let g = BallGreen::new(3, 1.0).unwrap().with_constant_scale(1.01);
        let rep = g.surface_identity_suite(&e1(3, 0.3), 64).unwrap();
        assert!(rep.max_residual > 5e-3);
        assert!(g.surface_identity_suite(&e1(3, 0.3), 8).is_err());
    }

    #[test]
    fn representation_formula() {
        for n in [3usize, 4] {
            let g = BallGreen::new(n, 1.0).unwrap();
            for t in [0.0, 0.5, 0.8] {
                let (v, u) = g.representation_check(&e1(n, t), 32).unwrap();
                assert!(rel(v, u) < 1e-4, "N={n} t={t}: {v} vs {u}");
            }
        }
    }

    proptest! {
        #[test]
        fn green_is_symmetric(a in proptest::collection::vec(-0.55f64..0.55, 3),
                              b in proptest::collection::vec(-0.55f64..0.55, 3)) {
            prop_assume!(dist2(&a, &b) > 1e-6);
            let g = BallGreen::new(3, 1.0).unwrap();
            let gab = g.green(&a, &b).unwrap();
            let gba = g.green(&b, &a).unwrap();
            prop_assert!((gab - gba).abs() <= 1e-12 * gab.abs().max(1.0));
            prop_assert!(gab > 0.0);
        }
    }
}
