//! Kippenhahn polynomials and curves of small complex matrices.
//!
//! The crate computes `p_A(x, y, z) = det(x Re A + y Im A + z I)` both by
//! interpolation and, for 5x5 upper-triangular inputs, by a closed-form
//! expansion; classifies 5x5 curves into points, ellipses and quartics with
//! a flat portion; and runs reproducible experiments on partial isometries
//! whose numerical range is a circular disc.

pub mod classify;
pub mod cli;
pub mod error;
pub mod generators;
pub mod harness;
pub mod kippenhahn;
pub mod linalg;
pub mod matrix;
pub mod plot;
pub mod poly;

pub use error::{KippError, Result};
pub use matrix::{ComplexMatrix, C64};
pub use poly::HomoPoly3;
