//! Outcome propagation, secure key rates and code optimization for one-way
//! quantum repeaters built on quantum parity codes.
//!
//! A logical qubit is encoded into `n` blocks of `m` photons. Bell measurements at
//! each repeater act on every photon pair; their results are combined into block
//! results and then into a logical result. This crate computes the outcome
//! probabilities at each level, turns them into transmission probabilities, bit
//! error rates and BB84 key rates for a chain of stations, and searches code
//! parameters and spacings that maximize rate or minimize cost.
//!
//! Modules:
//! - [`outcome`], [`params`], [`combinatorics`]: shared types and enumeration.
//! - [`physical`]: physical-level outcome matrices per error model.
//! - [`propagation`]: physical to block to logical outcome matrices.
//! - [`rates`]: chain rates and closed forms.
//! - [`model`]: the pipeline wiring the above together.
//! - [`oracle`]: Monte Carlo and state-vector cross-checks.
//! - [`optimizer`]: grid searches and repeaterless bounds.
//! - [`resources`]: photon-source and module counts for state generation.

pub mod combinatorics;
pub mod error;
pub mod model;
pub mod outcome;
pub mod params;
pub mod physical;
pub mod propagation;
pub mod optimizer;
pub mod oracle;
pub mod rates;
pub mod resources;

pub use error::{Error, Result};
pub use model::{Evaluation, Scenario};
pub use outcome::{BellState, CountVector, Level, Outcome, OutcomeMatrix};
pub use params::{ChannelParams, CodeParams, DetectorKind, DetectorParams, ErrorModelSpec, TiePolicy};
pub use propagation::RuleFamily;
pub use rates::{BmStats, RateReport};
