//! Linear-optics sign-shift gates with an `N`-term photon-number ancilla.
//!
//! The gate flips the sign of the highest Fock amplitude `c_N` of a signal
//! state truncated at `N` photons. This crate finds the beam-splitter
//! transmission and ancilla weights that realise it and computes the success
//! probability, with closed forms for the minimal ancilla `n_l = 0..N-1` and a
//! brute-force Fock-space simulator as an independent check.

pub mod cli;
pub mod determinants;
pub mod error;
pub mod fock;
pub mod gate;
pub mod identities;
pub mod numeric;
pub mod optimizer;
pub mod polynomials;

pub use determinants::NodeSet;
pub use error::{Error, Result};
pub use gate::{BeamSplitter, CoefficientMatrix, GateSolution};
