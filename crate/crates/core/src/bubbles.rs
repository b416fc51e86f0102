//! Aubin-Talenti bubbles.
//!
//! Two normalizations are in use and both are exposed explicitly:
//!
//! * [`Bubble`]: `U_{λ,a}(x) = (λ / (1 + λ²|x-a|²))^{(N-2)/2}`, with
//!   `U_{λ,a}(a) = λ^{(N-2)/2}` and `-ΔU = N(N-2) U^{2*-1}`;
//! * [`NormalizedBubble`]: `U(x) = (N(N-2) / (N(N-2) + |x|²))^{(N-2)/2}`,
//!   with `U(0) = 1` and `-ΔU = U^{2*-1}`. It equals `α_N U_{λ,0}` for
//!   `λ = (N(N-2))^{-1/2}`.
//!
//! The kernel functions of the linearized operator around `U` and the
//! projection `PU = U - ψ` onto `H¹_0` of a ball live here as well.

use crate::constants::omega_n;
use crate::geom::{dist2, frame, norm2, sub};
use crate::quad::SphereRule;
use crate::{Error, Result};

/// `U_{λ,a}`; the dimension is `center.len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bubble {
    lambda: f64,
    center: Vec<f64>,
}

/// Closed-form parameter derivatives of `U_{λ,a}` at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct BubbleDerivatives {
    pub d_by_lambda: f64,
    pub d_by_center: Vec<f64>,
}

impl Bubble {
    pub fn new(lambda: f64, center: Vec<f64>) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::Domain(format!("bubble height λ must be > 0, got {lambda}")));
        }
        if center.len() < 3 {
            return Err(Error::Domain(format!(
                "bubbles need N >= 3, got a centre in R^{}",
                center.len()
            )));
        }
        Ok(Self { lambda, center })
    }

    /// Bubble centred at the origin of `R^n`.
    pub fn centered(n: usize, lambda: f64) -> Result<Self> {
        Self::new(lambda, vec![0.0; n])
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        bubble_radial(self.dim(), self.lambda, dist2(x, &self.center).sqrt())
    }

    pub fn derivatives(&self, x: &[f64]) -> BubbleDerivatives {
        let n = self.dim() as f64;
        let lam = self.lambda;
        let d = sub(x, &self.center);
        let rho = 1.0 + lam * lam * norm2(&d);
        let common = (n - 2.0) * lam.powf((n + 2.0) / 2.0) * rho.powf(-n / 2.0);
        BubbleDerivatives {
            d_by_lambda: bubble_radial_dlambda(self.dim(), lam, norm2(&d).sqrt()),
            d_by_center: d.iter().map(|di| common * di).collect(),
        }
    }
}

/// `(λ/(1+λ²r²))^{(N-2)/2}`
pub fn bubble_radial(n: usize, lambda: f64, r: f64) -> f64 {
    let n = n as f64;
    (lambda / (1.0 + lambda * lambda * r * r)).powf((n - 2.0) / 2.0)
}

/// `∂_r U_{λ,0}(r) = -(N-2) λ^{(N+2)/2} r (1+λ²r²)^{-N/2}`
pub fn bubble_radial_dr(n: usize, lambda: f64, r: f64) -> f64 {
    let n = n as f64;
    -(n - 2.0) * lambda.powf((n + 2.0) / 2.0) * r * (1.0 + lambda * lambda * r * r).powf(-n / 2.0)
}

/// `∂_λ U_{λ,0}(r) = (N-2)/2 λ^{(N-4)/2} (1-λ²r²)(1+λ²r²)^{-N/2}`
pub fn bubble_radial_dlambda(n: usize, lambda: f64, r: f64) -> f64 {
    let n = n as f64;
    let l2r2 = lambda * lambda * r * r;
    (n - 2.0) / 2.0 * lambda.powf((n - 4.0) / 2.0) * (1.0 - l2r2) * (1.0 + l2r2).powf(-n / 2.0)
}

/// `∂_r ∂_λ U_{λ,0}(r)`
pub fn bubble_radial_dr_dlambda(n: usize, lambda: f64, r: f64) -> f64 {
    let n = n as f64;
    let l2r2 = lambda * lambda * r * r;
    -(n - 2.0)
        * r
        * lambda.powf(n / 2.0)
        * (1.0 + l2r2).powf(-n / 2.0 - 1.0)
        * ((n + 2.0) / 2.0 - (n - 2.0) / 2.0 * l2r2)
}

/// The bubble normalized to height one, `U(0) = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedBubble {
    n: usize,
    a: f64,
}

impl NormalizedBubble {
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Domain(format!("N must be >= 3, got {n}")));
        }
        let nf = n as f64;
        Ok(Self { n, a: nf * (nf - 2.0) })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.radial(norm2(x).sqrt())
    }

    pub fn radial(&self, r: f64) -> f64 {
        let n = self.n as f64;
        (self.a / (self.a + r * r)).powf((n - 2.0) / 2.0)
    }

    /// `U'(r)`
    pub fn radial_dr(&self, r: f64) -> f64 {
        let n = self.n as f64;
        -(n - 2.0) * r * self.a.powf((n - 2.0) / 2.0) * (self.a + r * r).powf(-n / 2.0)
    }

    /// `U'(r) / r`, finite at the origin.
    pub fn radial_dr_over_r(&self, r: f64) -> f64 {
        let n = self.n as f64;
        -(n - 2.0) * self.a.powf((n - 2.0) / 2.0) * (self.a + r * r).powf(-n / 2.0)
    }
}

/// `U(x)` for the normalized bubble.
pub fn eval_normalized(n: usize, x: &[f64]) -> Result<f64> {
    Ok(NormalizedBubble::new(n)?.eval(x))
}

/// Radial part of `ψ_0`: `(N(N-2) - r²)/(N(N-2) + r²)^{N/2}`.
pub fn kernel_radial_dilation(n: usize, r: f64) -> f64 {
    let nf = n as f64;
    let a = nf * (nf - 2.0);
    (a - r * r) * (a + r * r).powf(-nf / 2.0)
}

/// Radial part of `ψ_i = x_i g(r)`: `g(r) r = r/(N(N-2) + r²)^{N/2}`.
pub fn kernel_radial_translation(n: usize, r: f64) -> f64 {
    let nf = n as f64;
    let a = nf * (nf - 2.0);
    r * (a + r * r).powf(-nf / 2.0)
}

/// `ψ_index(x)`: index 0 is the dilation mode, `1..=N` the translations.
pub fn kernel_eval(n: usize, index: usize, x: &[f64]) -> Result<f64> {
    if n < 3 || x.len() != n {
        return Err(Error::Domain(format!("kernel_eval needs a point in R^{n}, N >= 3")));
    }
    if index > n {
        return Err(Error::Domain(format!("kernel index {index} out of range 0..={n}")));
    }
    let nf = n as f64;
    let a = nf * (nf - 2.0);
    let r2 = norm2(x);
    let den = (a + r2).powf(-nf / 2.0);
    Ok(if index == 0 { (a - r2) * den } else { x[index - 1] * den })
}

/// `-Δ_h f(r) - V(r) f(r)` for a radial function with the `N`-dimensional
/// radial Laplacian `f'' + (N-1)/r f'`, central differences with step `h`.
pub fn radial_residual<F, V>(n: usize, f: F, potential: V, r: f64, h: f64) -> f64
where
    F: Fn(f64) -> f64,
    V: Fn(f64) -> f64,
{
    let (fm, f0, fp) = (f(r - h), f(r), f(r + h));
    let lap = (fp - 2.0 * f0 + fm) / (h * h) + (n as f64 - 1.0) / r * (fp - fm) / (2.0 * h);
    -lap - potential(r) * f0
}

/// Projection `PU_{λ,a} = U_{λ,a} - ψ_{λ,a}` onto `H¹_0(B(0,R))`, with the
/// harmonic extension `ψ` evaluated by the Poisson integral.
#[derive(Debug, Clone)]
pub struct BallProjection {
    radius: f64,
    rule: SphereRule,
}

impl BallProjection {
    pub fn new(n: usize, radius: f64, quad_order: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Domain(format!("N must be >= 3, got {n}")));
        }
        if !(radius > 0.0) {
            return Err(Error::Domain(format!("ball radius must be > 0, got {radius}")));
        }
        Ok(Self {
            radius,
            rule: SphereRule::new(n, quad_order),
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    fn check(&self, b: &Bubble, x: &[f64]) -> Result<f64> {
        if b.dim() != self.rule.dim() || x.len() != self.rule.dim() {
            return Err(Error::Domain("dimension mismatch".into()));
        }
        let r2 = self.radius * self.radius;
        if norm2(b.center()) >= r2 {
            return Err(Error::Domain("bubble centre must lie inside the ball".into()));
        }
        let x2 = norm2(x);
        if x2 > r2 * (1.0 + 1e-14) {
            return Err(Error::Domain(format!(
                "|x| = {} lies outside the ball of radius {}",
                x2.sqrt(),
                self.radius
            )));
        }
        Ok(x2)
    }

    /// Harmonic extension `ψ_{λ,a}(x)` of the boundary values of `U_{λ,a}`.
    pub fn harmonic_part(&self, b: &Bubble, x: &[f64]) -> Result<f64> {
        let x2 = self.check(b, x)?;
        let r2 = self.radius * self.radius;
        if x2 >= r2 * (1.0 - 1e-14) {
            return Ok(b.eval(x));
        }
        let n = b.dim();
        let om = omega_n(n)?;
        let fr = frame(n, b.center(), x);
        let origin = vec![0.0; n];
        let kernel_scale = (r2 - x2) / (om * self.radius);
        Ok(self.rule.integrate(&origin, self.radius, &fr, |xi, _| {
            kernel_scale * dist2(x, xi).powf(-(n as f64) / 2.0) * b.eval(xi)
        }))
    }

    /// `PU_{λ,a}(x)`; zero on the boundary.
    pub fn projected(&self, b: &Bubble, x: &[f64]) -> Result<f64> {
        let x2 = self.check(b, x)?;
        if x2 >= self.radius * self.radius * (1.0 - 1e-14) {
            return Ok(0.0);
        }
        Ok(b.eval(x) - self.harmonic_part(b, x)?)
    }
}

/// `PU_{λ,a}(x)` on `B(0, ball_radius)` with a 64-point spherical rule.
pub fn projected_bubble(b: &Bubble, ball_radius: f64, x: &[f64]) -> Result<f64> {
    BallProjection::new(b.dim(), ball_radius, 64)?.projected(b, x)
}
