//! Closed-form bounds checked by the campaigns, in exact integer form.
//!
//! The real-valued bounds involve `log2(1/eps)`; replacing it by its floor
//! gives a smaller number, so staying below these is at least as strict.

use crate::covering::exponent_bound;
use crate::error::{Error, Result};
use crate::linalg::Rational;

/// `floor(log2(1/eps))`.
pub fn floor_log2_inv(eps: &Rational) -> Result<u32> {
    exponent_bound(eps, 2)
}

fn power(base: u64, dim: usize) -> Result<u64> {
    base.checked_pow(dim as u32)
        .ok_or_else(|| Error::Config(format!("{base}^{dim} overflows")))
}

fn times_orthants(x: u64, dim: usize) -> Result<u64> {
    x.checked_mul(power(2, dim)?).ok_or_else(|| Error::Config(format!("bound for dimension {dim} overflows")))
}

/// `2^n (1 + floor(log2(1/eps)))^n`, the size bound for the parallelepiped covering.
pub fn cover_count_bound(dim: usize, eps: &Rational) -> Result<u64> {
    times_orthants(power(1 + u64::from(floor_log2_inv(eps)?), dim)?, dim)
}

/// `2^n (2 + floor(log2(1/eps)))^n`, the oracle-call bound of one boosted query.
pub fn boost_call_bound(dim: usize, eps: &Rational) -> Result<u64> {
    times_orthants(power(2 + u64::from(floor_log2_inv(eps)?), dim)?, dim)
}

/// `n 3^{n-1} (1 + floor(log2(1/eps)))`, grid points in one orthant ellipsoid.
pub fn ellipsoid_grid_bound(dim: usize, eps: &Rational) -> Result<u64> {
    let levels = 1 + u64::from(floor_log2_inv(eps)?);
    Ok(dim as u64 * power(3, dim.saturating_sub(1))? * levels)
}

/// `2^n`, grid points in one positive-orthant parallelepiped.
pub fn parallelepiped_grid_bound(dim: usize) -> Result<u64> {
    power(2, dim)
}
