//! Error type shared by all library modules.

use thiserror::Error;

/// Errors produced by the surrogate construction pipeline and its building
/// blocks. Variants mirror the failure modes of the individual stages; an
/// infinite weight is *not* an error (it signals exclusion of an index).
#[derive(Debug, Error)]
pub enum CoreError {
    /// An argument lies outside its admissible domain (e.g. |t| > 1 beyond
    /// the clamp tolerance).
    #[error("domain error: {0}")]
    Domain(String),

    /// A multi-index references a coordinate beyond the supplied vector, or
    /// array lengths disagree.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Malformed multi-index data (duplicate or 0-based dimensions, bad text).
    #[error("invalid multi-index: {0}")]
    InvalidIndex(String),

    /// Invalid parameters for a weight sequence, problem or schedule.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// The candidate set {ν : ω_ν² ≤ s/2} is not finite for the requested
    /// weight configuration.
    #[error("infinite candidate set: {0}")]
    InfiniteSet(String),

    /// The diffusion coefficient is not uniformly bounded away from zero.
    #[error("ellipticity violation: {0}")]
    EllipticityViolation(String),

    /// An iterative linear solver exceeded its iteration cap.
    #[error("solver divergence: {0}")]
    SolverDivergence(String),

    /// A selected column subsystem is numerically singular.
    #[error("rank deficiency: {0}")]
    RankDeficiency(String),

    /// The residual constraint of a basis-pursuit problem cannot be met.
    #[error("infeasible constraint: {0}")]
    Infeasible(String),

    /// Recovery weights below 1 or below the sup-norm of their basis column.
    #[error("invalid recovery weights: {0}")]
    InvalidWeights(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed text in a surrogate or sample file.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
