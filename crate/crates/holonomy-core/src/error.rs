//! Error type shared by all modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Rank-deficient or otherwise numerically degenerate input.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// Singular matrix where an invertible one is required.
    #[error("singular matrix: smallest singular value {sigma_min:.3e}")]
    Singular { sigma_min: f64 },

    /// Eigenvalue gap below the non-degeneracy threshold.
    #[error("degenerate spectrum: eigenvalue gap {gap:.3e} below {min_gap:.3e}")]
    Degeneracy { gap: f64, min_gap: f64 },

    #[error("not on orbit: {0}")]
    NotOnOrbit(String),

    #[error("outside chart domain: {0}")]
    OutsideChart(String),

    /// An operation precondition was violated.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("step too large at s={s}: level {level} consecutive overlap {overlap:.3e}; refine the path")]
    StepTooLarge { s: f64, level: usize, overlap: f64 },

    #[error("quadrature did not converge: last two estimates {prev:.12e}, {last:.12e}")]
    QuadratureDiverged { prev: f64, last: f64 },

    #[error("phase accumulation did not reach tolerance {tol:.3e}: last change {change:.3e} at {steps} steps")]
    PhaseDiverged { tol: f64, change: f64, steps: usize },

    #[error("path not closed: endpoint distance {0:.3e}")]
    NotClosed(f64),

    #[error("non-cyclic evolution: commutator norm {0:.3e}")]
    NonCyclic(f64),

    #[error("lift undefined at s={s}: level {level} overlap with reference too small")]
    LiftUndefined { s: f64, level: usize },

    #[error("surface boundary does not match the loop: {0}")]
    BoundaryMismatch(String),

    #[error("curve is not class I: {0}")]
    NotClassI(String),

    #[error("segment chaining mismatch: {0}")]
    ChainingMismatch(String),

    #[error("null-phase closure unavailable: {0}")]
    ClosureUnavailable(String),

    #[error("invalid configuration: {0}")]
    Validation(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
