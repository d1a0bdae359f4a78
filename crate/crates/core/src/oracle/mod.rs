//! Independent checks of the propagation engine.
//!
//! The exact engine is cross-checked against photon-level Monte Carlo sampling and,
//! for small codes, against explicit state vectors.

pub mod montecarlo;
pub mod parity;
pub mod statevector;

pub use montecarlo::{mc_block_column, mc_logical_column, McConfig, McEstimate};
pub use parity::ParitySet;
pub use statevector::{verify_bell_representation, BellCheck};
