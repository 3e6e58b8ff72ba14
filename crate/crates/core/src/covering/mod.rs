//! Coverings of `H_eps = [-1+eps, 1-eps]^n` by bodies that stay inside
//! `H = [-1, 1]^n`, and the grid-counting machinery behind the matching
//! lower bounds.
//!
//! Each orthant is covered separately. Inside the positive orthant the
//! construction works in the flipped coordinates `y = 1 - x`, where the cube
//! piece becomes `[eps, 1]^n` and `H` becomes `H' = [0, 2]^n`; orthant `sigma`
//! is reached through `x = sigma * (1 - y)`.
//!
//! Bodies are emitted lazily in lexicographic `(orthant, exponents)` order,
//! with the `+1` side of each axis before the `-1` side.

mod boxes;
mod ellipsoids;
mod grid;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{AxisBox, AxisEllipsoid, Parallelepiped};
use crate::linalg::{int, serde_rational, Rational, RationalVector};
use crate::registry::Registry;

pub use boxes::{gen_box_cover, u_interval, BoxCover, ParallelepipedScheme};
pub use ellipsoids::{
    circumscribed_ellipsoid, gen_ellipsoid_cover, rationalized_ratio, EllipsoidCover,
    EllipsoidScheme, RATIO_DENOMINATOR_BITS,
};
pub use grid::{count_grid_in_body, grid_points, GridSpec};

/// Which side of an exponent threshold counts as "inside".
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Threshold {
    /// Largest `A` with `ratio^{-A} > eps`.
    Strict,
    /// Largest `A` with `ratio^{-A} >= eps`.
    Inclusive,
}

pub(crate) fn check_eps(eps: &Rational) -> Result<()> {
    if *eps > int(0) && *eps < int(1) {
        Ok(())
    } else {
        Err(Error::InvalidEps(eps.to_string()))
    }
}

/// Largest exponent `A >= 0` with `ratio^{-A}` above `eps`, by exact
/// repeated division.
pub fn max_exponent(eps: &Rational, ratio: &Rational, mode: Threshold) -> Result<u32> {
    check_eps(eps)?;
    if *ratio <= int(1) {
        return Err(Error::Config(format!("exponent ratio must exceed 1, got {ratio}")));
    }
    let mut a = 0u32;
    let mut next = ratio.recip();
    loop {
        let keep = match mode {
            Threshold::Strict => next > *eps,
            Threshold::Inclusive => next >= *eps,
        };
        if !keep {
            return Ok(a);
        }
        a += 1;
        next /= ratio;
    }
}

/// Per-axis exponent range for integer bases: base 2 is the grid convention
/// (`2^{-A} >= eps`), every other base the covering one (`base^{-A} > eps`).
pub fn exponent_bound(eps: &Rational, base: u32) -> Result<u32> {
    if base < 2 {
        return Err(Error::Config(format!("exponent base must be at least 2, got {base}")));
    }
    let mode = if base == 2 { Threshold::Inclusive } else { Threshold::Strict };
    max_exponent(eps, &int(base.into()), mode)
}

/// Position of a body in a covering: an orthant and per-axis exponents.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CoverIndex {
    pub orthant: Vec<i8>,
    pub exponents: Vec<u32>,
}

impl CoverIndex {
    pub fn dim(&self) -> usize {
        self.orthant.len()
    }

    pub(crate) fn sign(&self, j: usize) -> Rational {
        int(self.orthant[j].into())
    }
}

/// Lexicographic walk over `{+1,-1}^n x {0..levels}^n`.
#[derive(Clone, Debug)]
pub(crate) struct IndexOdometer {
    dim: usize,
    levels: u32,
    orthant: usize,
    exponents: Vec<u32>,
    done: bool,
}

impl IndexOdometer {
    pub(crate) fn new(dim: usize, levels: u32) -> Self {
        Self { dim, levels, orthant: 0, exponents: vec![0; dim], done: dim == 0 || levels == 0 }
    }

    /// Same walk restricted to the positive orthant.
    pub(crate) fn positive_only(dim: usize, levels: u32) -> impl Iterator<Item = Vec<u32>> {
        Self::new(dim, levels).take_while(|i| i.orthant.iter().all(|&s| s > 0)).map(|i| i.exponents)
    }
}

impl Iterator for IndexOdometer {
    type Item = CoverIndex;

    fn next(&mut self) -> Option<CoverIndex> {
        if self.done {
            return None;
        }
        let n = self.dim;
        let index = CoverIndex {
            orthant: (0..n)
                .map(|j| if self.orthant >> (n - 1 - j) & 1 == 1 { -1 } else { 1 })
                .collect(),
            exponents: self.exponents.clone(),
        };
        let mut j = n;
        loop {
            if j == 0 {
                self.orthant += 1;
                self.done = self.orthant == 1 << n;
                break;
            }
            j -= 1;
            self.exponents[j] += 1;
            if self.exponents[j] < self.levels {
                break;
            }
            self.exponents[j] = 0;
        }
        Some(index)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CoverKind {
    #[serde(rename = "box-parallelepiped", alias = "box")]
    BoxParallelepiped,
    #[serde(rename = "ellipsoid")]
    Ellipsoid,
}

impl CoverKind {
    /// Registry name of the scheme producing this kind.
    pub fn scheme_name(self) -> &'static str {
        match self {
            CoverKind::BoxParallelepiped => "box",
            CoverKind::Ellipsoid => "ellipsoid",
        }
    }
}

/// Achieved size of a generated covering.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverSpec {
    pub dim: usize,
    #[serde(with = "serde_rational")]
    pub eps: Rational,
    pub kind: CoverKind,
    pub per_axis_count: u64,
    pub total_count: u64,
}

impl CoverSpec {
    pub(crate) fn new(dim: usize, eps: &Rational, kind: CoverKind, per_axis_count: u64) -> Result<Self> {
        let total_count = u32::try_from(dim)
            .ok()
            .and_then(|d| per_axis_count.checked_pow(d))
            .and_then(|c| c.checked_mul(1u64.checked_shl(dim as u32)?))
            .ok_or_else(|| Error::Config(format!("covering of dimension {dim} is too large to count")))?;
        Ok(Self { dim, eps: eps.clone(), kind, per_axis_count, total_count })
    }
}

/// A single covering body.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoverBody {
    Parallelepiped(Parallelepiped),
    Ellipsoid(AxisEllipsoid),
}

impl CoverBody {
    pub fn dim(&self) -> usize {
        match self {
            CoverBody::Parallelepiped(p) => p.dim(),
            CoverBody::Ellipsoid(e) => e.dim(),
        }
    }

    pub fn contains(&self, x: &RationalVector) -> Result<bool> {
        match self {
            CoverBody::Parallelepiped(p) => p.contains(x, &int(1)),
            CoverBody::Ellipsoid(e) => e.contains(x),
        }
    }

    /// The safety condition of the covering: a parallelepiped doubled about
    /// its center, or an ellipsoid as is, must lie in `H`.
    pub fn is_safe(&self) -> bool {
        let h = AxisBox::unit_cube(self.dim());
        match self {
            CoverBody::Parallelepiped(p) => p.scaled_inside_box(&h, &int(2)),
            CoverBody::Ellipsoid(e) => e.inside_box(&h),
        }
    }

    /// Maps a body of orthant `index.orthant` through `y = 1 - sigma * x`,
    /// which sends `H` to `[0, 2]^n` and the orthant piece of `H_eps` to
    /// `[eps, 1]^n`.
    pub fn to_positive_orthant(&self, index: &CoverIndex) -> Result<CoverBody> {
        let n = self.dim();
        if index.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: index.dim() });
        }
        let signs: Vec<Rational> = (0..n).map(|j| index.sign(j)).collect();
        let flip = |c: &RationalVector| -> RationalVector {
            (0..n).map(|j| int(1) - &signs[j] * &c[j]).collect()
        };
        Ok(match self {
            CoverBody::Parallelepiped(p) => CoverBody::Parallelepiped(Parallelepiped::new(
                p.map().scale_columns(&signs),
                flip(p.center()),
            )?),
            CoverBody::Ellipsoid(e) => {
                CoverBody::Ellipsoid(AxisEllipsoid::new(flip(e.center()), e.sq_semi_axes().clone())?)
            }
        })
    }
}

impl From<Parallelepiped> for CoverBody {
    fn from(p: Parallelepiped) -> Self {
        CoverBody::Parallelepiped(p)
    }
}

impl From<AxisEllipsoid> for CoverBody {
    fn from(e: AxisEllipsoid) -> Self {
        CoverBody::Ellipsoid(e)
    }
}

/// Membership used by [`cover_point_query`].
pub trait CoverMember {
    fn covers(&self, x: &RationalVector) -> bool;
}

impl CoverMember for Parallelepiped {
    fn covers(&self, x: &RationalVector) -> bool {
        self.contains(x, &int(1)).unwrap_or(false)
    }
}

impl CoverMember for AxisEllipsoid {
    fn covers(&self, x: &RationalVector) -> bool {
        self.contains(x).unwrap_or(false)
    }
}

impl CoverMember for CoverBody {
    fn covers(&self, x: &RationalVector) -> bool {
        self.contains(x).unwrap_or(false)
    }
}

impl<B: CoverMember> CoverMember for &B {
    fn covers(&self, x: &RationalVector) -> bool {
        (*self).covers(x)
    }
}

/// Index of the first body containing `x`, if any.
pub fn cover_point_query<B: CoverMember>(
    cover: impl IntoIterator<Item = (CoverIndex, B)>,
    x: &RationalVector,
) -> Option<CoverIndex> {
    cover.into_iter().find(|(_, b)| b.covers(x)).map(|(i, _)| i)
}

pub type BodyStream = Box<dyn Iterator<Item = (CoverIndex, CoverBody)> + Send>;

/// A covering construction selectable by name.
pub trait CoverScheme: Send + Sync {
    fn name(&self) -> &'static str;

    fn kind(&self) -> CoverKind;

    fn spec(&self, dim: usize, eps: &Rational) -> Result<CoverSpec>;

    fn bodies(&self, dim: usize, eps: &Rational) -> Result<BodyStream>;

    /// Index of a body that should contain `x` when `x` lies in `H_eps`;
    /// a hint for fast coverage checks, always confirmed by exact membership.
    fn locate(&self, dim: usize, eps: &Rational, x: &RationalVector) -> Option<CoverIndex>;
}

pub type SchemeRegistry = Registry<Box<dyn CoverScheme>>;

/// Registry holding the `box` and `ellipsoid` schemes.
pub fn scheme_registry() -> SchemeRegistry {
    let mut r: SchemeRegistry = Registry::new("covering scheme");
    r.register("box", Box::new(ParallelepipedScheme));
    r.register("ellipsoid", Box::new(EllipsoidScheme));
    r
}
