//! Qubit teleportation through a non-maximally entangled resource, with a
//! tunable Bell-like measurement and noisy corrections on Bob's side.
//!
//! [`protocol`] is the exact density-matrix oracle, [`analytic`] holds the
//! closed-form average fidelities and optimal measurement angles, and
//! [`optimize`] searches the measurement angles numerically.

pub mod acceptance;
pub mod analytic;
pub mod channels;
pub mod error;
pub mod linalg;
pub mod optimize;
pub mod protocol;

pub use error::{Error, Result};
