//! Gauss-Legendre quadrature.
//!
//! Three flavours are used throughout the crate:
//!
//! * composite rules on explicit panel edges,
//! * the half line `[0, ∞)` through the substitution `r = tan θ`,
//! * spherical rules on `S^{N-1}` for integrands that only depend on the
//!   projections onto two fixed directions.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::constants::sphere_area;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the rule by Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = (n + 1) / 2;
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d.is_finite() {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫_a^b f`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }

    /// Composite rule over consecutive panels `[edges[k], edges[k+1]]`.
    pub fn composite<F: FnMut(f64) -> f64>(&self, edges: &[f64], mut f: F) -> f64 {
        edges
            .windows(2)
            .map(|w| self.integrate(w[0], w[1], &mut f))
            .sum()
    }

    /// Mapped nodes and weights for the composite rule on `edges`.
    pub fn composite_points(&self, edges: &[f64]) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.len() * edges.len().saturating_sub(1));
        for w in edges.windows(2) {
            let half = 0.5 * (w[1] - w[0]);
            let mid = 0.5 * (w[1] + w[0]);
            for (x, wt) in self.nodes.iter().zip(&self.weights) {
                out.push((mid + half * x, wt * half));
            }
        }
        out
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Panels used by [`integrate_half_line`]: 16 panels of 16 nodes.
const HALF_LINE_PANELS: usize = 16;
const HALF_LINE_ORDER: usize = 16;

/// `∫_0^∞ f(r) dr` through `r = tan θ`.
///
/// The θ-panels are graded geometrically toward `π/2`, so algebraic decay
/// of `f` (which becomes an endpoint singularity in θ) is resolved.
pub fn integrate_half_line<F: Fn(f64) -> f64>(f: F) -> f64 {
    let rule = GaussLegendre::new(HALF_LINE_ORDER);
    let mut edges = Vec::with_capacity(HALF_LINE_PANELS + 1);
    for k in 0..HALF_LINE_PANELS {
        edges.push(FRAC_PI_2 * (1.0 - 0.5f64.powi(k as i32)));
    }
    edges.push(FRAC_PI_2);
    rule.composite(&edges, |theta| {
        let c = theta.cos();
        if c <= 0.0 {
            return 0.0;
        }
        f(theta.tan()) / (c * c)
    })
}

/// Panel edges on `[0, s_max]`, uniform in `asinh(s / scale)`.
///
/// Resolves both a core of width `scale` near the origin and an algebraic
/// tail out to `s_max`.
pub fn asinh_edges(s_max: f64, scale: f64, panels: usize) -> Vec<f64> {
    let t_max = (s_max / scale).asinh();
    let mut edges: Vec<f64> = (0..=panels)
        .map(|k| scale * (t_max * k as f64 / panels as f64).sinh())
        .collect();
    edges[0] = 0.0;
    edges[panels] = s_max;
    edges
}

/// Quadrature on `S^{N-1}` for integrands that depend on a point `ξ` only
/// through `ξ·e1` and `ξ·e2` for two fixed orthonormal directions.
///
/// With `ξ = cos θ e1 + sin θ cos φ e2 + sin θ sin φ ζ`, `ζ ∈ S^{N-3}` in the
/// orthogonal complement, the surface element is
/// `sin^{N-2}θ sin^{N-3}φ dθ dφ dζ`; the ζ-integral contributes the factor
/// `|S^{N-3}|`. Each node is reported with the representative `ζ = e3`.
#[derive(Debug, Clone)]
pub struct SphereRule {
    dim: usize,
    /// `(cos θ, sin θ cos φ, sin θ sin φ, weight)`
    points: Vec<[f64; 4]>,
}

impl SphereRule {
    pub fn new(dim: usize, order: usize) -> Self {
        assert!(dim >= 3, "sphere rule needs N >= 3");
        let rule = GaussLegendre::new(order);
        let outer = sphere_area(dim - 2);
        let mut points = Vec::with_capacity(order * order);
        for (xt, wt) in rule.nodes().iter().zip(rule.weights()) {
            let theta = FRAC_PI_2 * (xt + 1.0);
            let (st, ct) = theta.sin_cos();
            let wtheta = wt * FRAC_PI_2 * st.powi(dim as i32 - 2);
            for (xp, wp) in rule.nodes().iter().zip(rule.weights()) {
                let phi = FRAC_PI_2 * (xp + 1.0);
                let (sp, cp) = phi.sin_cos();
                let w = wtheta * wp * FRAC_PI_2 * sp.powi(dim as i32 - 3) * outer;
                points.push([ct, st * cp, st * sp, w]);
            }
        }
        Self { dim, points }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[[f64; 4]] {
        &self.points
    }

    /// Integrates `f(ξ)` over the sphere of radius `radius` centred at
    /// `center`, with `frame = [e1, e2, e3]` orthonormal. The surface
    /// element includes `radius^{N-1}`.
    pub fn integrate<F>(&self, center: &[f64], radius: f64, frame: &[Vec<f64>; 3], mut f: F) -> f64
    where
        F: FnMut(&[f64], &[f64]) -> f64,
    {
        let jac = radius.powi(self.dim as i32 - 1);
        let mut acc = 0.0;
        let mut xi = vec![0.0; self.dim];
        let mut normal = vec![0.0; self.dim];
        for p in &self.points {
            for k in 0..self.dim {
                normal[k] = p[0] * frame[0][k] + p[1] * frame[1][k] + p[2] * frame[2][k];
                xi[k] = center[k] + radius * normal[k];
            }
            acc += p[3] * f(&xi, &normal);
        }
        acc * jac
    }

    /// Vector-valued version of [`SphereRule::integrate`]. Only the
    /// components along `e1` and `e2` are kept: by symmetry of the
    /// integrand class the rest of the integral vanishes.
    pub fn integrate_vec<F>(
        &self,
        center: &[f64],
        radius: f64,
        frame: &[Vec<f64>; 3],
        mut f: F,
    ) -> Vec<f64>
    where
        F: FnMut(&[f64], &[f64]) -> Vec<f64>,
    {
        let jac = radius.powi(self.dim as i32 - 1);
        let mut c1 = 0.0;
        let mut c2 = 0.0;
        let mut xi = vec![0.0; self.dim];
        let mut normal = vec![0.0; self.dim];
        for p in &self.points {
            for k in 0..self.dim {
                normal[k] = p[0] * frame[0][k] + p[1] * frame[1][k] + p[2] * frame[2][k];
                xi[k] = center[k] + radius * normal[k];
            }
            let v = f(&xi, &normal);
            let w = p[3];
            c1 += w * crate::geom::dot(&v, &frame[0]);
            c2 += w * crate::geom::dot(&v, &frame[1]);
        }
        (0..self.dim)
            .map(|k| jac * (c1 * frame[0][k] + c2 * frame[1][k]))
            .collect()
    }
}
