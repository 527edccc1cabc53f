//! Heat transport and photon squeezing in a qubit-resonator system with
//! quadratic longitudinal coupling, each subsystem attached to its own bath.

pub mod bath;
pub mod cumulants;
pub mod error;
pub mod generator;
pub mod observables;
pub mod overlap;
pub mod point;
pub mod spectrum;
pub mod sweep;

pub use error::{Error, Result};
