use thiserror::Error;

/// Errors raised by the spectral toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("integration diverged at step {step} of {steps} (lambda = {lambda})")]
    Divergence {
        step: usize,
        steps: usize,
        lambda: String,
    },

    #[error(
        "contour passes within {distance:.3e} of a zero at {location}; nudge the radius or center"
    )]
    BoundaryTooClose { distance: f64, location: String },

    #[error("phase jump unresolved after bisection depth {depth} near {location}")]
    PhaseJumpUnresolved { depth: usize, location: String },

    #[error("count mismatch on {region}: winding number {winding}, located multiplicities {located} ({detail})")]
    CountMismatch {
        region: String,
        winding: i64,
        located: i64,
        detail: String,
    },

    #[error("matrix Psi is singular on the contour (min |rho| = {min_rho:.3e}); move delta")]
    SingularPsi { min_rho: f64 },

    #[error("Newton iteration did not converge in {iterations} iterations; trajectory {trajectory:?}")]
    NoConvergence {
        iterations: usize,
        trajectory: Vec<f64>,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
