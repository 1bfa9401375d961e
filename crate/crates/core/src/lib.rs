//! Discrepancy of two-dimensional toral translations relative to triangles.
//!
//! Exact fixed-point orbit counting, a Féjer-averaged Fourier evaluator with a
//! quadrature cross-check, small-divisor enumerations, and growth experiments.

pub mod arithmetic;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod orbit;
pub mod smalldivisors;
pub mod spectral;

pub use error::{Error, Result};
