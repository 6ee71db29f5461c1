//! Joint hierarchical linear ballistic accumulator models for choice and
//! response-time data from several tasks or sessions.
//!
//! Each subject carries one vector of log-scale parameters spanning every
//! task; subjects' vectors are multivariate normal across the population,
//! so the fitted covariance measures how latent decision parameters line
//! up between tasks. Posterior sampling uses particle
//! Metropolis-within-Gibbs.
//!
//! Layers, bottom up:
//! - [`lba`]: race densities, distribution functions and simulation
//! - [`design`]: mapping parameter vectors to per-cell accumulators
//! - [`likelihood`]: per-subject likelihoods
//! - [`hierarchy`]: population model, priors and conjugate updates
//! - [`sampler`]: the three-stage particle sampler
//! - [`analysis`], [`simstudy`], [`svg`]: summaries, recovery harness, figures
//! - [`workbench`]: command implementations for the `accjoint` binary

pub mod analysis;
pub mod chain;
pub mod design;
pub mod error;
pub mod fixtures;
pub mod hierarchy;
pub mod lba;
pub mod likelihood;
pub mod linalg;
pub mod normal;
pub mod rng;
pub mod sampler;
pub mod simstudy;
pub mod svg;
pub mod workbench;

pub use error::{Error, Result};
