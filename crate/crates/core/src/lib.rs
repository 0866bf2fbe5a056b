//! Simulation of dissipatively prepared entanglement between two NV centers
//! coupled through whispering-gallery-mode resonators.
//!
//! The crate builds the system at four levels of approximation
//! ([`model::Tier`]), integrates Lindblad dynamics directly or by quantum
//! trajectories ([`dynamics`]), and evaluates fidelity and singlet/triplet
//! populations ([`analysis`]).

pub mod analysis;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod hilbert;
pub mod linalg;
pub mod model;
pub mod runner;
pub mod sparse;

pub use error::{Error, Result};
