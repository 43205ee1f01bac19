//! Simulation and theory toolkit for the p-spin interaction glass with
//! external field.
//!
//! The crate has three layers that check each other at desk scale:
//!
//! - [`theory`]: closed-form replica-symmetric predictions (overlap fixed
//!   point, free energy, AT margin, fluctuation variances, CLT moments).
//! - [`exact`]: full 2^N enumeration for small systems (partition function,
//!   correlations, exact Gibbs sampling, the T-decomposition identity).
//! - [`mcmc`]: Glauber/Metropolis chains for sizes beyond enumeration.
//!
//! [`estimators`] averages either engine over quenched disorder with
//! jackknife error bars and compares the results against [`theory`];
//! [`verify`] packages those comparisons into the acceptance suite.
//!
//! Everything is deterministic given a 64-bit seed: disorder, chains and
//! replica draws all derive from counter-based streams, and data-parallel
//! runs reduce in task order so results are schedule independent.

pub mod combinatorics;
pub mod error;
pub mod estimators;
pub mod exact;
pub mod mcmc;
pub mod model;
pub mod parallel;
pub mod theory;
pub mod verify;
pub mod rng;

pub use error::{Error, Result};
