//! Computational toolkit for simultaneous diagonal quadratic and cubic
//! equations: modular arithmetic primitives, coefficient-form normalization
//! and enumeration, local solvability certificates, complete exponential
//! sums, singular-series coefficients, and desk-scale solution counting.

pub mod count;
pub mod error;
pub mod expsum;
pub mod forms;
pub mod local;
pub mod report;
pub mod residue;
pub mod series;

pub use error::{Error, Result};
