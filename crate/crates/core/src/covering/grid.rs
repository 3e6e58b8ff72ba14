use serde::{Deserialize, Serialize};

use super::{exponent_bound, CoverBody, IndexOdometer};
use crate::error::{Error, Result};
use crate::linalg::{int, pow, serde_rational, Rational, RationalVector};

/// The grid `G_eps` of points whose coordinates are `2^{-a} >= eps`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dim: usize,
    #[serde(with = "serde_rational")]
    pub eps: Rational,
    /// `1 + floor(log2(1/eps))`.
    pub levels: u32,
}

impl GridSpec {
    pub fn new(dim: usize, eps: &Rational) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("grid dimension must be at least 1".into()));
        }
        Ok(Self { dim, eps: eps.clone(), levels: exponent_bound(eps, 2)? + 1 })
    }

    /// `levels^dim`.
    pub fn size(&self) -> u64 {
        u64::from(self.levels).pow(self.dim as u32)
    }
}

pub fn grid_points(spec: &GridSpec) -> impl Iterator<Item = RationalVector> {
    let coords: Vec<Rational> = (0..spec.levels).map(|a| pow(&int(2), -i64::from(a))).collect();
    IndexOdometer::positive_only(spec.dim, spec.levels)
        .map(move |alpha| alpha.iter().map(|&a| coords[a as usize].clone()).collect())
}

/// Exact number of grid points inside `body`.
///
/// Parallelepipeds must stay in the closed positive orthant after doubling
/// about their center; ellipsoids must lie in it as they are.
pub fn count_grid_in_body(body: &CoverBody, spec: &GridSpec) -> Result<u64> {
    if body.dim() != spec.dim {
        return Err(Error::DimensionMismatch { expected: spec.dim, found: body.dim() });
    }
    let ok = match body {
        CoverBody::Parallelepiped(p) => p.scaled_in_positive_orthant(&int(2)),
        CoverBody::Ellipsoid(e) => e.in_positive_orthant(),
    };
    if !ok {
        return Err(Error::PreconditionViolated(
            "body leaves the closed positive orthant".into(),
        ));
    }
    let mut count = 0;
    for x in grid_points(spec) {
        if body.contains(&x)? {
            count += 1;
        }
    }
    Ok(count)
}
