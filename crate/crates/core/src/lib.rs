//! Critical behavior of the rank-1 inhomogeneous Curie-Weiss model and the
//! annealed Ising model on generalized random graphs.
//!
//! The crate computes the mean-field fixed point, magnetization and
//! susceptibility of both models, their critical temperatures and exponents,
//! and the non-classical scaling limit of the total spin at criticality:
//! exact finite-N quantities through the Hubbard-Stratonovich integral
//! representation, exact sampling of the total spin, limiting critical
//! densities, and 2^n enumeration oracles to check everything against.
//!
//! All state is immutable after construction and every operation is a pure
//! function, so values can be shared freely across threads.

pub mod clt;
pub mod criticality;
pub mod error;
pub mod kahan;
pub mod meanfield;
pub mod model;
pub mod quad;
pub mod weights;

pub use error::{Error, Result};
