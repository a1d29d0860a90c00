//! Stochastic Galerkin solver for the two-dimensional shallow water
//! equations with uncertain bottom topography and initial data.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod error;
pub mod galerkin;
pub mod linalg;
pub mod pce;
pub mod scenarios;
pub mod solver;
pub mod space;
pub mod swe;

pub use error::{Error, Result};
pub use pce::PceVector;
