//! Measured/unmeasured correlation analysis for CHSH-type spin set-ups and
//! generalized no-signalling boxes.
//!
//! The crate is split into four layers:
//!
//! - [`quantum_model`]: coplanar measurement directions, pairwise correlation
//!   and match probabilities, and the CHSH expression.
//! - [`counterfactual`]: the Pearson measure on ±1 outcome sequences, the
//!   overlap lower bound on the measured/unmeasured correlation, the
//!   conditional-independence product rule, information leakage and the
//!   nonlocality verdict.
//! - [`nsbox`]: 16-entry no-signalling boxes, both CHSH forms, and the
//!   box-level versions of the bounds above.
//! - [`montecarlo`]: a seeded sampler for every analytic quantity, used as an
//!   independent oracle.

pub mod counterfactual;
pub mod error;
pub mod montecarlo;
pub mod nsbox;
pub mod quantum_model;

pub use error::{Error, Result};
