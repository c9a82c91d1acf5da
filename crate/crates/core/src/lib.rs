//! Multi-level compressed-sensing Petrov-Galerkin (MLCSPG) surrogates for
//! scalar quantities of interest of affine-parametric elliptic PDEs.
//!
//! The pipeline approximates F(y) = G(u(y)) pointwise on [−1, 1]^d:
//!
//! 1. solve the diffusion problem at randomly sampled parameter points on a
//!    hierarchy of dyadically refined P1 finite element meshes ([`pde`]),
//! 2. recover tensorized Chebyshev coefficients of the level-to-level QoI
//!    details from few samples by weighted sparse recovery ([`recovery`],
//!    candidate sets and weights from [`weights`], basis from [`chebyshev`]),
//! 3. telescope the per-level expansions into one evaluable surrogate
//!    ([`pipeline`]), with error/work studies in [`mod@bench`].
//!
//! Sampling, scheduling and recovery are deterministic given a master seed;
//! parallelism never changes results.

// validations use `!(x >= c)` so NaN arguments are rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod chebyshev;
pub mod error;
pub mod multiindex;
pub mod pde;
pub mod pipeline;
pub mod recovery;
pub mod rng;
pub mod weights;

pub use error::{CoreError, Result};
pub use multiindex::MultiIndex;
pub use weights::{WeightConfig, WeightKind, WeightedVector};
