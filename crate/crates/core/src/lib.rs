//! Three-qubit quantum absorption refrigerator.
//!
//! The crate assembles the coarse-grained Markovian master equation for a
//! hot/cold/work qubit triple coupled by an `XXX` (or resonant) interaction,
//! together with its local and global limiting forms, and evaluates the
//! stationary heat currents, efficiency, entropy production and
//! entanglement diagnostics. The [`experiments`] module turns these into
//! deterministic CSV parameter sweeps.
//!
//! Units: `ħ = k_B = 1` and `ω_c = 1`, so frequencies, temperatures and
//! rates are all measured in units of the cold-qubit frequency and powers
//! in `ħω_c²`.

pub mod baths;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod model;
pub mod observables;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = nalgebra::Complex<f64>;
