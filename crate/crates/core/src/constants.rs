//! Special functions and the closed-form constants of the blow-up analysis.
//!
//! Conventions: `ω_N` is the surface area of the unit sphere `S^{N-1}`
//! (not the volume of the ball), `α_N = (N(N-2))^{(N-2)/4}` and the bubble
//! `U_{1,0}(x) = (1 + |x|²)^{-(N-2)/2}`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::quad::integrate_half_line;
use crate::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Γ(x) for real `x > 0`, Lanczos approximation with g = 7 and 9 terms.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("gamma_fn requires x > 0, got {x}")));
    }
    Ok(gamma_unchecked(x))
}

fn gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        return PI / ((PI * x).sin() * gamma_unchecked(1.0 - x));
    }
    let x = x - 1.0;
    let mut a = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * ((x + 0.5) * t.ln() - t).exp() * a
}

/// Surface area `2π^{k/2}/Γ(k/2)` of the unit sphere in `R^k`, `k >= 1`.
pub(crate) fn sphere_area(k: usize) -> f64 {
    let h = k as f64 / 2.0;
    2.0 * PI.powf(h) / gamma_unchecked(h)
}

/// `ω_N`, the surface area of the unit sphere in `R^N`.
pub fn omega_n(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!("omega_n requires N >= 2, got {n}")));
    }
    Ok(sphere_area(n))
}

/// Dimension and exponents of a problem instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Params {
    pub n: usize,
    pub q: f64,
    pub two_star: f64,
    /// `max{2, 4/(N-2)} < q < 2*`
    pub regime_ok: bool,
}

impl Params {
    /// Accepts any `N >= 3` and `1 < q < 2*`. Whether the asymptotic laws
    /// apply is recorded in `regime_ok`; see [`Params::require_regime`].
    pub fn new(n: usize, q: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::Domain(format!("dimension N must be >= 3, got {n}")));
        }
        let nf = n as f64;
        let two_star = 2.0 * nf / (nf - 2.0);
        if !q.is_finite() || q <= 1.0 || q >= two_star {
            return Err(Error::Domain(format!(
                "q must lie in (1, 2*) = (1, {two_star}), got {q}"
            )));
        }
        let lower = Self::regime_lower_bound(n);
        Ok(Self {
            n,
            q,
            two_star,
            regime_ok: q > lower && q < two_star,
        })
    }

    /// `max{2, 4/(N-2)}`
    pub fn regime_lower_bound(n: usize) -> f64 {
        f64::max(2.0, 4.0 / (n as f64 - 2.0))
    }

    /// Errors with a message naming the violated bound unless `regime_ok`.
    pub fn require_regime(&self) -> Result<()> {
        if self.regime_ok {
            return Ok(());
        }
        let lower = Self::regime_lower_bound(self.n);
        if self.q <= lower {
            Err(Error::Regime(format!(
                "q = {} must exceed max{{2, 4/(N-2)}} = {} for N = {}",
                self.q, lower, self.n
            )))
        } else {
            Err(Error::Regime(format!(
                "q = {} must be below 2* = {} for N = {}",
                self.q, self.two_star, self.n
            )))
        }
    }

    pub fn dim(&self) -> f64 {
        self.n as f64
    }

    /// `q + 2 - 2*`, the power of `μ` in the blow-up product.
    pub fn blowup_power(&self) -> f64 {
        self.q + 2.0 - self.two_star
    }

    /// `(2N - (N-2)q)/2`: `ε = ε̃ R̃^{this}` under the unit-height rescaling.
    pub fn eps_scaling_power(&self) -> f64 {
        let n = self.dim();
        (2.0 * n - (n - 2.0) * self.q) / 2.0
    }

    /// `(2N-4)/((N-2)q-4)`, the exponent of the energy deficit in `ε`.
    pub fn deficit_exponent(&self) -> f64 {
        let n = self.dim();
        (2.0 * n - 4.0) / ((n - 2.0) * self.q - 4.0)
    }

    /// `α_N = (N(N-2))^{(N-2)/4}`
    pub fn alpha_n(&self) -> f64 {
        let n = self.dim();
        (n * (n - 2.0)).powf((n - 2.0) / 4.0)
    }
}

/// The closed-form constants attached to `(N, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantSet {
    pub alpha_n: f64,
    pub omega_n: f64,
    pub c_nq: f64,
    pub alpha_nq: f64,
    pub sobolev_sn2: f64,
}

impl ConstantSet {
    pub fn compute(p: &Params) -> Result<Self> {
        Ok(Self {
            alpha_n: p.alpha_n(),
            omega_n: omega_n(p.n)?,
            c_nq: c_nq(p)?,
            alpha_nq: alpha_nq(p)?,
            sobolev_sn2: sobolev_sn2(p.n)?,
        })
    }
}

/// `C_{N,q} = ∫_0^∞ r^{N-1}(1+r²)^{-(N-2)q/2} dr
///          = Γ(N/2) Γ((N-2)q/2 - N/2) / (2 Γ((N-2)q/2))`.
pub fn c_nq(p: &Params) -> Result<f64> {
    p.require_regime()?;
    let (half_n, a) = c_nq_arguments(p)?;
    Ok(gamma_fn(half_n)? * gamma_fn(a - half_n)? / (2.0 * gamma_fn(a)?))
}

/// Quadrature route to `C_{N,q}`, independent of Γ.
pub fn c_nq_quadrature(p: &Params) -> Result<f64> {
    let (_, a) = c_nq_arguments(p)?;
    let n = p.n as i32;
    Ok(integrate_half_line(|r| {
        r.powi(n - 1) * (1.0 + r * r).powf(-a)
    }))
}

fn c_nq_arguments(p: &Params) -> Result<(f64, f64)> {
    let n = p.dim();
    let a = (n - 2.0) * p.q / 2.0;
    if a - n / 2.0 <= 0.0 {
        return Err(Error::Domain(format!(
            "r^(N-1)(1+r^2)^(-(N-2)q/2) is not integrable for q = {} <= N/(N-2)",
            p.q
        )));
    }
    Ok((n / 2.0, a))
}

/// `α_{N,q} = 2q/(2*-q) · α_N^{2*} ω_N / N² · Γ((N-2)q/2) / (Γ(N/2) Γ((N-2)q/2 - N/2))`.
pub fn alpha_nq(p: &Params) -> Result<f64> {
    p.require_regime()?;
    let n = p.dim();
    let (half_n, a) = c_nq_arguments(p)?;
    let prefactor = 2.0 * p.q / (p.two_star - p.q);
    let bubble = p.alpha_n().powf(p.two_star) * omega_n(p.n)? / (n * n);
    Ok(prefactor * bubble * gamma_fn(a)? / (gamma_fn(half_n)? * gamma_fn(a - half_n)?))
}

/// `S^{N/2} = α_N² ∫_{R^N} |∇U_{1,0}|²`, by radial quadrature.
pub fn sobolev_sn2(n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::Domain(format!("sobolev_sn2 requires N >= 3, got {n}")));
    }
    let nf = n as f64;
    let alpha = (nf * (nf - 2.0)).powf((nf - 2.0) / 4.0);
    let ni = n as i32;
    let grad = integrate_half_line(|r| {
        // |U'(r)|² r^{N-1} with U' = -(N-2) r (1+r²)^{-N/2}
        (nf - 2.0).powi(2) * r.powi(ni + 1) * (1.0 + r * r).powi(-ni)
    });
    Ok(alpha * alpha * sphere_area(n) * grad)
}

/// `α_N^{2*} ∫_{R^N} U_{1,0}^{2*}`, the second route to `S^{N/2}`.
pub fn sobolev_sn2_from_critical_norm(n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::Domain(format!("N must be >= 3, got {n}")));
    }
    let nf = n as f64;
    let two_star = 2.0 * nf / (nf - 2.0);
    let alpha = (nf * (nf - 2.0)).powf((nf - 2.0) / 4.0);
    let ni = n as i32;
    let norm = integrate_half_line(|r| r.powi(ni - 1) * (1.0 + r * r).powi(-ni));
    Ok(alpha.powf(two_star) * sphere_area(n) * norm)
}

/// Best Sobolev constant `S`.
pub fn sobolev_constant(n: usize) -> Result<f64> {
    Ok(sobolev_sn2(n)?.powf(2.0 / n as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn gamma_known_values() {
        assert!(rel(gamma_fn(1.0).unwrap(), 1.0) < 1e-14);
        assert!(rel(gamma_fn(0.5).unwrap(), PI.sqrt()) < 1e-14);
        assert!(rel(gamma_fn(5.0).unwrap(), 24.0) < 1e-14);
        let mut fact = 1.0;
        for k in 1..=40u32 {
            fact *= k as f64;
            let g = gamma_fn(k as f64 + 1.0).unwrap();
            assert!(rel(g, fact) < 1e-12, "Γ({}) = {g}, expected {fact}", k + 1);
        }
        // Γ(3/2) = √π/2, Γ(5/2) = 3√π/4
        assert!(rel(gamma_fn(1.5).unwrap(), PI.sqrt() / 2.0) < 1e-14);
        assert!(rel(gamma_fn(2.5).unwrap(), 0.75 * PI.sqrt()) < 1e-14);
    }

    #[test]
    fn gamma_rejects_non_positive() {
        assert!(matches!(gamma_fn(0.0), Err(Error::Domain(_))));
        assert!(matches!(gamma_fn(-1.5), Err(Error::Domain(_))));
        assert!(matches!(gamma_fn(f64::NAN), Err(Error::Domain(_))));
    }

    #[test]
    fn gamma_recurrence_on_grid() {
        let mut x = 0.5;
        while x <= 20.0 {
            let lhs = gamma_fn(x + 1.0).unwrap();
            let rhs = x * gamma_fn(x).unwrap();
            assert!(rel(lhs, rhs) < 1e-10, "x = {x}");
            x += 0.5;
        }
    }

    #[test]
    fn sphere_areas() {
        assert!(rel(omega_n(2).unwrap(), 2.0 * PI) < 1e-14);
        assert!(rel(omega_n(3).unwrap(), 4.0 * PI) < 1e-14);
        assert!(rel(omega_n(4).unwrap(), 2.0 * PI * PI) < 1e-14);
        assert!(omega_n(1).is_err());
        assert!((sphere_area(1) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn params_validation() {
        let p = Params::new(4, 3.0).unwrap();
        assert_eq!(p.two_star, 4.0);
        assert!(p.regime_ok);
        assert!(Params::new(2, 3.0).is_err());
        assert!(Params::new(4, 4.0).is_err());
        let low = Params::new(4, 2.0).unwrap();
        assert!(!low.regime_ok);
        let msg = low.require_regime().unwrap_err().to_string();
        assert!(msg.contains("must exceed"), "{msg}");
        // N = 3: the bound is 4/(N-2) = 4
        assert!(Params::new(3, 5.0).unwrap().regime_ok);
        assert!(!Params::new(3, 3.0).unwrap().regime_ok);
        assert!((Params::new(5, 3.0).unwrap().two_star - 10.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn c_nq_matches_quadrature() {
        for (n, q) in [(4, 3.0), (3, 5.0), (5, 3.0), (6, 2.5), (7, 2.2), (4, 3.7), (3, 4.5)] {
            let p = Params::new(n, q).unwrap();
            let a = c_nq(&p).unwrap();
            let b = c_nq_quadrature(&p).unwrap();
            assert!(rel(a, b) < 1e-8, "N={n} q={q}: {a} vs {b}");
        }
    }

    #[test]
    fn c_nq_examples() {
        // ∫ r³(1+r²)^{-3} dr = 1/4
        let p = Params::new(4, 3.0).unwrap();
        assert!(rel(c_nq(&p).unwrap(), 0.25) < 1e-13);
        assert!(rel(c_nq_quadrature(&p).unwrap(), 0.25) < 1e-10);
        // Γ(3/2)Γ(1)/(2Γ(5/2)) = 1/3
        let p = Params::new(3, 5.0).unwrap();
        assert!(rel(c_nq(&p).unwrap(), 1.0 / 3.0) < 1e-13);
    }

    #[test]
    fn c_nq_requires_regime() {
        let p = Params::new(3, 3.0).unwrap();
        assert!(matches!(c_nq(&p), Err(Error::Regime(_))));
        // q = 2.5 <= N/(N-2) = 3 for N = 3: not integrable at all
        let p = Params::new(3, 2.5).unwrap();
        assert!(matches!(c_nq_quadrature(&p), Err(Error::Domain(_))));
    }

    #[test]
    fn alpha_nq_for_n4_q3() {
        // 2q/(2*-q) = 6, α₄⁴ = 64, ω₄ = 2π², N² = 16, Γ(3)/(Γ(2)Γ(1)) = 2
        let p = Params::new(4, 3.0).unwrap();
        let expected = 6.0 * 64.0 * 2.0 * PI * PI / 16.0 * 2.0;
        assert!(rel(expected, 96.0 * PI * PI) < 1e-15);
        assert!(rel(alpha_nq(&p).unwrap(), expected) < 1e-12);
    }

    #[test]
    fn alpha_nq_diverges_at_critical_exponent() {
        let a = alpha_nq(&Params::new(4, 3.9).unwrap()).unwrap();
        let b = alpha_nq(&Params::new(4, 3.999).unwrap()).unwrap();
        assert!(b > 50.0 * a);
    }

    #[test]
    fn sobolev_routes_agree() {
        for n in 3..=8 {
            let a = sobolev_sn2(n).unwrap();
            let b = sobolev_sn2_from_critical_norm(n).unwrap();
            assert!(rel(a, b) < 1e-8, "N={n}: {a} vs {b}");
            // S = N(N-2)/4 · |S^N|^{2/N}
            let nf = n as f64;
            let s = nf * (nf - 2.0) / 4.0 * sphere_area(n + 1).powf(2.0 / nf);
            assert!(rel(sobolev_constant(n).unwrap(), s) < 1e-8, "N={n}");
        }
        assert!(sobolev_sn2(2).is_err());
    }

    #[test]
    fn constant_set_positive() {
        let c = ConstantSet::compute(&Params::new(5, 3.0).unwrap()).unwrap();
        for v in [c.alpha_n, c.omega_n, c.c_nq, c.alpha_nq, c.sobolev_sn2] {
            assert!(v > 0.0 && v.is_finite());
        }
        assert!(rel(c.alpha_n, 15f64.powf(0.75)) < 1e-15);
    }

    proptest! {
        #[test]
        fn alpha_nq_is_continuous_in_q(n in 3usize..9, t in 0.0f64..1.0) {
            let lo = Params::regime_lower_bound(n) + 0.05;
            let hi = 2.0 * n as f64 / (n as f64 - 2.0) - 0.05;
            prop_assume!(hi > lo + 0.01);
            let q = lo + t * (hi - lo - 0.01);
            let a = alpha_nq(&Params::new(n, q).unwrap()).unwrap();
            let b = alpha_nq(&Params::new(n, q + 0.01).unwrap()).unwrap();
            prop_assert!(a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0);
            // the prefactor 2q/(2*-q) dominates the variation; adjacent values stay close
            prop_assert!((b / a - 1.0).abs() < 0.5, "q={} a={} b={}", q, a, b);
        }
    }
}
