//! Cube coverings by parallelepipeds and ellipsoids, and their use in
//! boosting gap oracles for the closest vector problem in the max norm.
//!
//! All arithmetic is exact over arbitrary-precision rationals.

pub mod boost;
pub mod covering;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod linalg;
pub mod oracles;
pub mod registry;

pub use error::{Error, Result};
pub use linalg::{Rational, RationalMatrix, RationalVector};
