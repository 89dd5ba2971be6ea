use thiserror::Error;

/// Errors produced by the numerical routines in this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the validated domain of a special function.
    #[error("domain error in {routine}: {message}")]
    Domain { routine: &'static str, message: String },

    /// Two states or matrices live on different lattices / bases.
    #[error("lattice mismatch: {0}")]
    LatticeMismatch(String),

    /// Index preconditions violated (e.g. n1 + n2 != n + k).
    #[error("index mismatch: {0}")]
    IndexMismatch(String),

    /// A kernel computation found an unexpected number of null vectors.
    #[error("unexpected kernel dimension in {routine}: expected {expected}, found {found}")]
    KernelDimension {
        routine: &'static str,
        expected: usize,
        found: usize,
    },

    /// An iterative computation exhausted its budget before converging.
    #[error("no convergence in {routine} after {budget} iterations (residual {residual:.3e})")]
    NonConvergence {
        routine: &'static str,
        budget: usize,
        residual: f64,
    },

    /// A quadrature failed to reach the requested error estimate.
    #[error("quadrature did not converge: estimated error {estimate:.3e} > target {target:.3e}")]
    QuadratureAccuracy { estimate: f64, target: f64 },

    /// A computed quantity failed a numerical self-check (e.g. a probability
    /// distribution that does not normalize).
    #[error("numerical validation failed: {0}")]
    Validation(String),

    /// Explicit time stepping rejected the step size.
    #[error("step rejected: {0}")]
    StepRejected(String),

    /// Finite-difference step produced inconsistent Richardson estimates.
    #[error("finite-difference step {h:.3e} unreliable: two-step estimates disagree by {ratio:.1}x")]
    StepUnreliable { h: f64, ratio: f64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the CLI contract: 2 for configuration errors,
    /// 3 for numerical-validation failures, 4 for non-convergence.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Validation(_) => 3,
            Error::NonConvergence { .. } | Error::QuadratureAccuracy { .. } => 4,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
