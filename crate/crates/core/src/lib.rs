//! Numerical laboratory for the critical-exponent Balian–Low phenomenon.
//!
//! The crate computes finite Zak transforms of compactly supported signals,
//! Gabor frame diagnostics, mean-oscillation (BMO/VMO) functionals of planar
//! fields, anisotropic Sobolev norms and winding numbers of mollified
//! quasi-periodic fields.

pub mod degree;
pub mod error;
pub mod io;
pub mod oscillation;
pub mod quadrature;
pub mod scenario;
pub mod signal;
pub mod smooth;
pub mod synth;
pub mod zak;

pub use error::{Error, Result};
pub use num_complex::Complex64;
