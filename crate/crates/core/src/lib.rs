//! Fractional strong maximal operators on discrete Heisenberg groups, the
//! Córdoba–Fefferman rectangle selection, and experiment harnesses that
//! measure the constants in the associated covering and weak-type estimates.

pub mod analysis;
pub mod cli;
pub mod covering;
pub mod dd;
pub mod error;
pub mod heisenberg;
pub mod lattice;
pub mod maximal;
pub mod rng;
pub mod selftest;

pub use error::{Error, Result};
