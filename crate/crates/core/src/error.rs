use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Evaluation at a singular point (e.g. the pole of a Green's function).
    #[error("singular evaluation: {0}")]
    Singular(String),

    /// The (N, q) pair is outside the regime the asymptotic laws cover.
    #[error("invalid regime: {0}")]
    Regime(String),

    /// The adaptive integrator could not continue.
    #[error("integration failure at r = {at}: {reason}")]
    Integration { at: f64, reason: String },

    /// No shooting parameter produces the requested epsilon.
    #[error("epsilon = {target} is not reachable on the scanned branch")]
    Unreachable { target: f64 },

    /// A precondition of the operation is not met.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A fit or extrapolation could not be carried out.
    #[error("fit failure: {0}")]
    Fit(String),

    /// An iterative method did not converge.
    #[error("no convergence: {0}")]
    NoConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;
