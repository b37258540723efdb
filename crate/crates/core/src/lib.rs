//! Exact and Monte Carlo tools for periodically banded GUE matrices.
//!
//! The crate is organised bottom-up:
//!
//! - [`combinat`]: pair partitions of `[2ℓ]`, cycles of `γ∘π`, genus and
//!   map-counting numbers `ε_g(ℓ)`.
//! - [`quotient`]: the quotient multigraph of the directed `2ℓ`-cycle under a
//!   pair partition, its underlying simple graph, double trees.
//! - [`counting`]: exact counts of band-admissible labelings and the
//!   genus-one limit integrals.
//! - [`moments`]: exact finite-`N` trace moments, first-order corrections and
//!   their critical-regime limits, colored mixed moments.
//! - [`freeharm`]: Cauchy transforms, subordination for `⊞` and `⊞_B`,
//!   outlier positions and the closed-form correction densities.
//! - [`rmtsim`]: sampling, deformation and extremal-eigenvalue statistics.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod combinat;
pub mod counting;
mod error;
pub mod freeharm;
pub mod moments;
pub mod quotient;
pub mod rmtsim;
pub mod rng;

pub use error::{Error, Result};

/// Version string echoed into run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
