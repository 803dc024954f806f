//! Coherent Pauli checks for Clifford payload circuits: check generation and
//! compilation, Pauli-frame Monte Carlo simulation, and analytic performance
//! models.

pub mod checks;
pub mod compile;
pub mod error;
pub mod gate;
pub mod models;
pub mod noise;
pub mod pauli;
pub mod schedule;
pub mod sim;
pub mod stats;
pub mod synth;
pub mod tableau;

pub use error::{Error, Result};
pub use gate::{Gate, GateKind};
pub use pauli::{commutes, random_pauli, Pauli, PauliString};
pub use tableau::{apply_circuit, compose, conjugate, inverse, random_clifford, CliffordTableau};
