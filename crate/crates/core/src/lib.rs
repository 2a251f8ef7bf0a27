//! Block-spin renormalization maps for Ising-type systems and exact spectral
//! certificates for their linearizations at infinite temperature.

pub mod cli;
pub mod coeff;
pub mod error;
pub mod kernel;
pub mod lattice;
pub mod report;
pub mod rg_exact;
pub mod rg_linear;
pub mod sampling;
pub mod scalar;
pub mod spectral;
pub mod spin;
pub mod verify;

pub use error::{Error, Result};
