//! Modular-method toolkit for the equation x⁴ − dy² = zᵖ over real
//! quadratic fields Q(√d).
//!
//! The crate covers exact field arithmetic, unit and genus data, the local
//! description of the attached Hecke character, Frey-curve reductions, the
//! residual irreducibility bound, a newform eigenvalue sieve, the explicit
//! analytic bound and brute-force solution searches.

pub mod analytic;
pub mod arith;
pub mod error;
pub mod forms;
pub mod frey;
pub mod hecke;
pub mod irred;
pub mod pipeline;
pub mod poly;
pub mod quadfield;
pub mod residue;
pub mod solutions;
pub mod unitgenus;

pub use error::{Error, Result};
