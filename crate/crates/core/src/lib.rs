//! Hamiltonian sequential Monte Carlo.
//!
//! The crate is organised bottom-up:
//!
//! * [`target`], [`ensemble`], [`rng`]: the shared domain types (log-density
//!   kernels with box constraints, weighted particle ensembles and
//!   reproducible counter-based random streams).
//! * [`targets`]: the benchmark densities (banana, Gaussian, smiley,
//!   dropwave, non-linear logit) and the tempering/annealing wrappers.
//! * [`kde`]: Gaussian kernel density estimates, both as sampling targets and
//!   as the leave-one-out denominator of the HSMC correction weights.
//! * [`kernels`]: Metropolis-Hastings and (constrained) Hamiltonian
//!   transition kernels.
//! * [`smc`]: target sequences and the SMC/HSMC engines.
//! * [`diagnostics`]: moments, effective sample size and mode masses.

pub mod diagnostics;
pub mod ensemble;
pub mod error;
pub mod kde;
pub mod kernels;
pub mod rng;
pub mod smc;
pub mod target;
pub mod targets;

pub use ensemble::{make_ensemble, normalize_weights, Ensemble, Particle};
pub use error::{Error, Result};
pub use rng::{Purpose, RandomSource, StreamKey};
pub use target::{BoxConstraints, LogDensity, TargetDensity};

#[cfg(test)]
pub(crate) mod testing;
