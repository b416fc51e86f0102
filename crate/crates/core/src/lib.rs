//! Numerical laboratory for the Brezis-Nirenberg problem
//!
//! ```text
//!     -Δu = u^(2*-1) + ε u^(q-1),  u > 0 in B(0,1),  u = 0 on ∂B(0,1)
//! ```
//!
//! Positive radial solutions are computed by shooting in a rescaled
//! variable and then checked against the closed-form blow-up laws:
//! the limit of `ε μ^(q+2-2*)`, the energy deficit exponent, convergence
//! to the Aubin-Talenti bubble, Green/Robin function identities on the
//! ball, the bubble decomposition and the spectrum of the linearization.
//!
//! Module map:
//!
//! * [`constants`] - Γ, sphere areas and the constants `C_{N,q}`, `α_{N,q}`, `S^{N/2}`
//! * [`quad`] - Gauss-Legendre rules, half-line and spherical quadrature
//! * [`ode`] - Dormand-Prince 5(4) integrator with dense output
//! * [`bubbles`] - bubbles, their derivatives, kernel functions, projections
//! * [`green`] - Green's function, regular part and Robin function of a ball
//! * [`radial`] - the shooting solver and energy functionals
//! * [`asymptotics`] - continuation sweeps and limit fits
//! * [`decomposition`] - fit of `u = α PU_λ + w`
//! * [`linearization`] - mode-by-mode spectra of the linearized operator
//! * [`checks`] - the identity suite used by `bnlab verify`

pub mod asymptotics;
pub mod bubbles;
pub mod checks;
pub mod constants;
pub mod decomposition;
pub mod green;
pub mod linearization;
pub mod ode;
pub mod quad;
pub mod radial;
pub mod roots;

mod error;
mod geom;

pub use constants::{ConstantSet, Params};
pub use error::{Error, Result};
