//! Deterministic rotor-router ("Propp machine") models on the square lattice.

pub mod abelian_rr2;
pub mod abelian_rr4;
pub mod analysis;
pub mod error;
pub mod export;
pub mod lattice;
pub mod numeric;
pub mod pipeline;
pub mod rotor_walk;

pub use error::{Error, Result};
