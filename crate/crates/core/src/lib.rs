//! Numerical solver for Poincaré boundary value problems for elliptic
//! systems in exterior planar domains.
//!
//! The pipeline reduces a boundary problem to a singular integral system
//! on the boundary curve, computes its Noether data (normality, index,
//! kernel dimensions), solves it and reconstructs the field off the curve.

pub mod bitsadze;
pub mod decomposable;
pub mod error;
pub mod geometry;
pub mod quadrature;
pub mod sie;
pub mod verification;

pub use error::{Error, Result, SolvabilityCondition};

pub type C64 = num_complex::Complex64;
