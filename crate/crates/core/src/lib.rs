//! Weak-selection population genetics viewed as multiplicative-update
//! dynamics in a coordination game between genes.
//!
//! - [`landscape`]: fitness matrices `W`, differential landscapes `Δ`, sampling.
//! - [`dynamics`]: genotype and marginal steppers, linkage disequilibrium, noise.
//! - [`regret`]: mixability accounting and no-regret checks on trajectories.
//! - [`diversity`]: equilibrium supports, sign-flipping search, Monte Carlo.

pub mod diversity;
pub mod dynamics;
pub mod error;
pub mod landscape;
pub mod matrix;
pub mod regret;
pub mod seed;

pub use error::{Error, Result};
