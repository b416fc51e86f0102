//! Dormand-Prince 5(4) with dense output and terminal event location.
//!
//! The integrator keeps every accepted step so the solution can be
//! evaluated anywhere on the integrated interval. A terminal event
//! `g(t, y)` stops the integration at the first time `g` drops from
//! positive to `<= 0`; the stopping time is located by Brent's method on
//! the Runge-Kutta step itself, so the final state is a genuine 5th order
//! step rather than an interpolated value.

use crate::roots::brent;
use crate::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Integrator settings.
#[derive(Debug, Clone)]
pub struct Dopri5<const D: usize> {
    pub rtol: f64,
    pub atol: [f64; D],
    pub initial_step: Option<f64>,
    pub max_steps: usize,
}

impl<const D: usize> Dopri5<D> {
    pub fn new(rtol: f64, atol: [f64; D]) -> Self {
        Self {
            rtol,
            atol,
            initial_step: None,
            max_steps: 1_000_000,
        }
    }

    pub fn with_initial_step(mut self, h: f64) -> Self {
        self.initial_step = Some(h);
        self
    }
}

/// One accepted step with its continuous extension.
#[derive(Debug, Clone)]
struct DenseStep<const D: usize> {
    t: f64,
    h: f64,
    rcont: [[f64; D]; 5],
}

impl<const D: usize> DenseStep<D> {
    fn eval(&self, t: f64) -> [f64; D] {
        let theta = (t - self.t) / self.h;
        let theta1 = 1.0 - theta;
        let mut out = [0.0; D];
        for i in 0..D {
            let r = &self.rcont;
            out[i] = r[0][i]
                + theta * (r[1][i] + theta1 * (r[2][i] + theta * (r[3][i] + theta1 * r[4][i])));
        }
        out
    }
}

/// The accepted steps of one integration.
#[derive(Debug, Clone)]
pub struct Trajectory<const D: usize> {
    t0: f64,
    y0: [f64; D],
    steps: Vec<DenseStep<D>>,
    t_end: f64,
    y_end: [f64; D],
}

impl<const D: usize> Trajectory<D> {
    pub fn t_start(&self) -> f64 {
        self.t0
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn y_end(&self) -> &[f64; D] {
        &self.y_end
    }

    pub fn n_steps(&self) -> usize {
        self.steps.len()
    }

    /// Dense evaluation; `t` is clamped to the integrated interval.
    pub fn eval(&self, t: f64) -> [f64; D] {
        if self.steps.is_empty() || t <= self.t0 {
            return self.y0;
        }
        if t >= self.t_end {
            return self.y_end;
        }
        let idx = self.steps.partition_point(|s| s.t <= t).saturating_sub(1);
        self.steps[idx].eval(t)
    }

    /// `(t, y)` at the start of every step and at the end point.
    pub fn mesh(&self) -> Vec<(f64, [f64; D])> {
        let mut out: Vec<(f64, [f64; D])> = self.steps.iter().map(|s| (s.t, s.rcont[0])).collect();
        out.push((self.t_end, self.y_end));
        out
    }
}

/// Result of [`Dopri5::integrate`].
#[derive(Debug, Clone)]
pub struct Integration<const D: usize> {
    pub trajectory: Trajectory<D>,
    /// `Some(t)` if the terminal event fired.
    pub event: Option<f64>,
}

struct StepOut<const D: usize> {
    y: [f64; D],
    k7: [f64; D],
    err: [f64; D],
    ks: [[f64; D]; 7],
}

fn rk_step<const D: usize, F>(f: &F, t: f64, y: &[f64; D], k1: &[f64; D], h: f64) -> StepOut<D>
where
    F: Fn(f64, &[f64; D]) -> [f64; D],
{
    let mut tmp = [0.0; D];
    for i in 0..D {
        tmp[i] = y[i] + h * A21 * k1[i];
    }
    let k2 = f(t + C2 * h, &tmp);
    for i in 0..D {
        tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
    }
    let k3 = f(t + C3 * h, &tmp);
    for i in 0..D {
        tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
    }
    let k4 = f(t + C4 * h, &tmp);
    for i in 0..D {
        tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
    }
    let k5 = f(t + C5 * h, &tmp);
    for i in 0..D {
        tmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
    }
    let k6 = f(t + h, &tmp);
    let mut ynew = [0.0; D];
    for i in 0..D {
        ynew[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
    }
    let k7 = f(t + h, &ynew);
    let mut err = [0.0; D];
    for i in 0..D {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    StepOut {
        y: ynew,
        k7,
        err,
        ks: [*k1, k2, k3, k4, k5, k6, k7],
    }
}

fn dense_coefficients<const D: usize>(y: &[f64; D], out: &StepOut<D>, h: f64) -> [[f64; D]; 5] {
    let mut r = [[0.0; D]; 5];
    let k = &out.ks;
    for i in 0..D {
        let ydiff = out.y[i] - y[i];
        let bspl = h * k[0][i] - ydiff;
        r[0][i] = y[i];
        r[1][i] = ydiff;
        r[2][i] = bspl;
        r[3][i] = ydiff - h * k[6][i] - bspl;
        r[4][i] = h
            * (D1 * k[0][i] + D3 * k[2][i] + D4 * k[3][i] + D5 * k[4][i] + D6 * k[5][i] + D7 * k[6][i]);
    }
    r
}

impl<const D: usize> Dopri5<D> {
    fn error_norm(&self, y: &[f64; D], out: &StepOut<D>) -> f64 {
        let mut acc = 0.0;
        for i in 0..D {
            let sc = self.atol[i] + self.rtol * y[i].abs().max(out.y[i].abs());
            let e = out.err[i] / sc;
            acc += e * e;
        }
        (acc / D as f64).sqrt()
    }

    /// Integrates `y' = f(t, y)` from `t0` toward `t_end > t0`.
    ///
    /// `event`, when given, is a terminal event: integration stops at the
    /// first root where `g` passes from positive to non-positive.
    pub fn integrate<F, G>(
        &self,
        f: F,
        t0: f64,
        y0: [f64; D],
        t_end: f64,
        event: Option<G>,
    ) -> Result<Integration<D>>
    where
        F: Fn(f64, &[f64; D]) -> [f64; D],
        G: Fn(f64, &[f64; D]) -> f64,
    {
        if !(t_end > t0) {
            return Err(Error::Precondition(format!(
                "integration interval [{t0}, {t_end}] is empty"
            )));
        }
        let mut t = t0;
        let mut y = y0;
        let mut k1 = f(t, &y);
        let mut h = self
            .initial_step
            .unwrap_or_else(|| 1e-3 * (t_end - t0).min(t0.abs().max(1e-6)));
        h = h.min(t_end - t0);
        let mut steps = Vec::new();
        let mut g_prev = event.as_ref().map(|g| g(t, &y));
        let mut rejected_last = false;

        for _ in 0..self.max_steps {
            if t >= t_end {
                break;
            }
            if t + h > t_end {
                h = t_end - t;
            }
            if h <= 1e-14 * t.abs().max(1e-300) {
                return Err(Error::Integration {
                    at: t,
                    reason: format!("step size underflow (h = {h:e})"),
                });
            }
            let out = rk_step(&f, t, &y, &k1, h);
            let finite = out.y.iter().chain(out.err.iter()).all(|v| v.is_finite());
            let err = if finite { self.error_norm(&y, &out) } else { f64::INFINITY };

            if err > 1.0 {
                let fac = if err.is_finite() {
                    (0.9 * err.powf(-0.2)).max(0.2)
                } else {
                    0.1
                };
                h *= fac;
                rejected_last = true;
                continue;
            }

            // event check on the accepted step
            if let (Some(g), Some(gp)) = (event.as_ref(), g_prev) {
                let g_new = g(t + h, &out.y);
                if gp > 0.0 && g_new <= 0.0 {
                    let (t_hit, h_hit, hit) = self.locate_event(&f, g, t, &y, &k1, h)?;
                    steps.push(DenseStep {
                        t,
                        h: h_hit,
                        rcont: dense_coefficients(&y, &hit, h_hit),
                    });
                    return Ok(Integration {
                        trajectory: Trajectory {
                            t0,
                            y0,
                            steps,
                            t_end: t_hit,
                            y_end: hit.y,
                        },
                        event: Some(t_hit),
                    });
                }
                g_prev = Some(g_new);
            }

            steps.push(DenseStep {
                t,
                h,
                rcont: dense_coefficients(&y, &out, h),
            });
            t += h;
            y = out.y;
            k1 = out.k7;

            let mut fac = if err > 0.0 { 0.9 * err.powf(-0.2) } else { 5.0 };
            fac = fac.clamp(0.2, 5.0);
            if rejected_last {
                fac = fac.min(1.0);
            }
            rejected_last = false;
            h *= fac;
        }
        if t < t_end {
            return Err(Error::Integration {
                at: t,
                reason: format!("step budget of {} exhausted", self.max_steps),
            });
        }
        Ok(Integration {
            trajectory: Trajectory {
                t0,
                y0,
                steps,
                t_end: t,
                y_end: y,
            },
            event: None,
        })
    }

    /// Root of `h ↦ g(t + h, step(h))` on `(0, h_full]`.
    fn locate_event<F, G>(
        &self,
        f: &F,
        g: &G,
        t: f64,
        y: &[f64; D],
        k1: &[f64; D],
        h_full: f64,
    ) -> Result<(f64, f64, StepOut<D>)>
    where
        F: Fn(f64, &[f64; D]) -> [f64; D],
        G: Fn(f64, &[f64; D]) -> f64,
    {
        let phi = |h: f64| {
            if h <= 0.0 {
                return g(t, y);
            }
            let out = rk_step(f, t, y, k1, h);
            g(t + h, &out.y)
        };
        let xtol = 4.0 * f64::EPSILON * (t + h_full).abs();
        let h_hit = brent(phi, 0.0, h_full, xtol, 200)?;
        let h_hit = h_hit.max(f64::MIN_POSITIVE);
        let out = rk_step(f, t, y, k1, h_hit);
        Ok((t + h_hit, h_hit, out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_with_dense_output() {
        let solver = Dopri5::new(1e-11, [1e-13; 2]);
        let run = solver
            .integrate(
                |_, y: &[f64; 2]| [y[1], -y[0]],
                0.0,
                [0.0, 1.0],
                10.0,
                None::<fn(f64, &[f64; 2]) -> f64>,
            )
            .unwrap();
        assert!(run.event.is_none());
        let y = run.trajectory.y_end();
        assert!((y[0] - 10f64.sin()).abs() < 1e-9);
        for k in 0..100 {
            let t = 0.1 * k as f64 + 0.037;
            let v = run.trajectory.eval(t);
            assert!((v[0] - t.sin()).abs() < 1e-8, "t={t}");
        }
    }

    #[test]
    fn terminal_event_locates_first_zero() {
        let solver = Dopri5::new(1e-12, [1e-14; 2]);
        let run = solver
            .integrate(
                |_, y: &[f64; 2]| [y[1], -y[0]],
                0.0,
                [1.0, 0.0],
                10.0,
                Some(|_: f64, y: &[f64; 2]| y[0]),
            )
            .unwrap();
        let t = run.event.unwrap();
        assert!((t - std::f64::consts::FRAC_PI_2).abs() < 1e-11, "{t}");
        assert!(run.trajectory.y_end()[0].abs() < 1e-12);
    }

    #[test]
    fn exponential_growth_relative_accuracy() {
        let solver = Dopri5::new(1e-10, [0.0; 1]).with_initial_step(1e-3);
        let run = solver
            .integrate(
                |_, y: &[f64; 1]| [y[0]],
                0.0,
                [1.0],
                20.0,
                None::<fn(f64, &[f64; 1]) -> f64>,
            )
            .unwrap();
        let y = run.trajectory.y_end()[0];
        assert!(((y - 20f64.exp()) / 20f64.exp()).abs() < 1e-8);
    }

    #[test]
    fn empty_interval_is_rejected() {
        let solver = Dopri5::new(1e-8, [1e-8; 1]);
        let r = solver.integrate(
            |_, y: &[f64; 1]| [y[0]],
            1.0,
            [1.0],
            1.0,
            None::<fn(f64, &[f64; 1]) -> f64>,
        );
        assert!(matches!(r, Err(Error::Precondition(_))));
    }
}
