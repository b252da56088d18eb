//! Finite-dimensional model of quantum measurement.
//!
//! A closed system of microsystems, measuring apparatuses, observers
//! ("students") and an environment evolves unitarily. Macrostates are
//! subspaces of the macrosystems' spaces. The crate builds these objects
//! explicitly and checks, numerically, that the usual measurement rules
//! (observables as orthogonal decompositions, definite outcomes, Born
//! weights as limiting frequencies, apparent collapse) follow from the
//! unitary dynamics alone.
//!
//! * [`linalg`]: vectors, subspaces, projectors, isometries, seeded sampling.
//! * [`model`]: the cast and the three evolution rules.
//! * [`engine`]: dense state-vector evolution and exact branch ledgers.
//! * [`checks`]: executable pass/fail procedures for each measurement rule.

pub mod band;
pub mod checks;
pub mod engine;
pub mod error;
pub mod linalg;
pub mod model;
pub mod seed;

pub use error::{Error, Result};
