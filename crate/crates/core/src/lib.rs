//! Equilibria, stability, trajectories, invariant manifolds and
//! bifurcations of a predator–prey model with additional food and
//! Beddington–DeAngelis type mutual interference among predators.

// `!(a < b)` rejects NaN along with the failing comparison
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bifurcation;
pub mod cli;
pub mod equilibria;
pub mod error;
pub mod integrate;
pub mod linalg;
pub mod manifolds;
pub mod model;
pub mod stability;

pub use error::{Error, Result};
