//! Axis boxes, parallelepipeds and axis-parallel ellipsoids with exact
//! membership and containment predicates.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{int, rat, Rational, RationalMatrix, RationalVector};

/// Closed box `lower <= x <= upper`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawBox")]
pub struct AxisBox {
    lower: RationalVector,
    upper: RationalVector,
}

#[derive(Deserialize)]
struct RawBox {
    lower: RationalVector,
    upper: RationalVector,
}

impl TryFrom<RawBox> for AxisBox {
    type Error = Error;

    fn try_from(raw: RawBox) -> Result<Self> {
        AxisBox::new(raw.lower, raw.upper)
    }
}

impl AxisBox {
    pub fn new(lower: RationalVector, upper: RationalVector) -> Result<Self> {
        upper.check_dim(lower.dim())?;
        if lower.dim() == 0 {
            return Err(Error::InvalidBox("zero-dimensional box".into()));
        }
        if let Some(j) = (0..lower.dim()).find(|&j| lower[j] > upper[j]) {
            return Err(Error::InvalidBox(format!(
                "lower bound {} exceeds upper bound {} on axis {j}",
                lower[j], upper[j]
            )));
        }
        Ok(Self { lower, upper })
    }

    /// The cube `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: Rational, hi: Rational) -> Result<Self> {
        Self::new(RationalVector::filled(dim, lo), RationalVector::filled(dim, hi))
    }

    /// `H = [-1, 1]^dim`.
    pub fn unit_cube(dim: usize) -> Self {
        Self::cube(dim, int(-1), int(1)).expect("valid cube")
    }

    /// `H_eps = [-1 + eps, 1 - eps]^dim`, for `0 <= eps <= 1`.
    pub fn shrunk_cube(dim: usize, eps: &Rational) -> Result<Self> {
        let one = Rational::one();
        Self::cube(dim, eps - &one, one - eps)
    }

    pub fn dim(&self) -> usize {
        self.lower.dim()
    }

    pub fn lower(&self) -> &RationalVector {
        &self.lower
    }

    pub fn upper(&self) -> &RationalVector {
        &self.upper
    }

    pub fn midpoint(&self) -> RationalVector {
        let half = rat(1, 2);
        self.lower.add(&self.upper).scale(&half)
    }

    pub fn half_widths(&self) -> RationalVector {
        let half = rat(1, 2);
        self.upper.sub(&self.lower).scale(&half)
    }

    pub fn contains(&self, x: &RationalVector) -> Result<bool> {
        x.check_dim(self.dim())?;
        Ok((0..self.dim()).all(|j| self.lower[j] <= x[j] && x[j] <= self.upper[j]))
    }

    /// All `2^dim` vertices, in binary counting order (bit set = upper bound).
    pub fn corners(&self) -> impl Iterator<Item = RationalVector> + '_ {
        let n = self.dim();
        (0..1usize << n).map(move |mask| {
            (0..n)
                .map(|j| {
                    if mask >> (n - 1 - j) & 1 == 1 {
                        self.upper[j].clone()
                    } else {
                        self.lower[j].clone()
                    }
                })
                .collect()
        })
    }
}

/// `{x : ||E (x - d)||_inf <= 1}` for a nonsingular map `E` and center `d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawParallelepiped")]
pub struct Parallelepiped {
    #[serde(rename = "E")]
    map: RationalMatrix,
    #[serde(rename = "d")]
    center: RationalVector,
}

#[derive(Deserialize)]
struct RawParallelepiped {
    #[serde(rename = "E")]
    map: RationalMatrix,
    #[serde(rename = "d")]
    center: RationalVector,
}

impl TryFrom<RawParallelepiped> for Parallelepiped {
    type Error = Error;

    fn try_from(raw: RawParallelepiped) -> Result<Self> {
        Parallelepiped::new(raw.map, raw.center)
    }
}

impl Parallelepiped {
    pub fn new(map: RationalMatrix, center: RationalVector) -> Result<Self> {
        center.check_dim(map.dim())?;
        if map.is_singular() {
            return Err(Error::SingularMatrix);
        }
        Ok(Self { map, center })
    }

    /// Axis-aligned parallelepiped equal to the box: `E = diag(1/h)`, `d` the midpoint.
    pub fn from_box(b: &AxisBox) -> Result<Self> {
        let h = b.half_widths();
        if let Some(axis) = h.iter().position(Zero::is_zero) {
            return Err(Error::DegenerateBox { axis });
        }
        let inv: RationalVector = h.iter().map(|x| x.recip()).collect();
        Ok(Self { map: RationalMatrix::diagonal(&inv), center: b.midpoint() })
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn map(&self) -> &RationalMatrix {
        &self.map
    }

    pub fn center(&self) -> &RationalVector {
        &self.center
    }

    /// `||E (x - d)||_inf <= scale`.
    pub fn contains(&self, x: &RationalVector, scale: &Rational) -> Result<bool> {
        x.check_dim(self.dim())?;
        let y = self.map.mul_vec(&x.sub(&self.center))?;
        Ok(y.inf_norm() <= *scale)
    }

    pub fn inverse_map(&self) -> RationalMatrix {
        self.map.invert().expect("parallelepiped map is nonsingular")
    }

    /// Vertices `d + scale * E^{-1} sigma` of the dilate, `sigma` in `{-1, 1}^n`.
    pub fn vertices(&self, inverse: &RationalMatrix, scale: &Rational) -> Vec<RationalVector> {
        let n = self.dim();
        let columns: Vec<RationalVector> =
            (0..n).map(|j| inverse.column(j).scale(scale)).collect();
        (0..1usize << n)
            .map(|mask| {
                let mut v = self.center.clone();
                for (j, col) in columns.iter().enumerate() {
                    v = if mask >> j & 1 == 1 { v.sub(col) } else { v.add(col) };
                }
                v
            })
            .collect()
    }

    /// Whether the `scale`-dilate about the center lies inside `outer`,
    /// decided on all `2^n` vertices.
    pub fn scaled_inside_box(&self, outer: &AxisBox, scale: &Rational) -> bool {
        self.scaled_inside_box_with(&self.inverse_map(), outer, scale)
    }

    /// As [`Self::scaled_inside_box`] with a caller-cached `E^{-1}`.
    pub fn scaled_inside_box_with(
        &self,
        inverse: &RationalMatrix,
        outer: &AxisBox,
        scale: &Rational,
    ) -> bool {
        if outer.dim() != self.dim() {
            return false;
        }
        self.vertices(inverse, scale)
            .iter()
            .all(|v| outer.contains(v).unwrap_or(false))
    }

    /// Whether every vertex of the `scale`-dilate has nonnegative coordinates.
    pub fn scaled_in_positive_orthant(&self, scale: &Rational) -> bool {
        self.vertices(&self.inverse_map(), scale)
            .iter()
            .all(|v| v.iter().all(|x| !x.is_negative()))
    }
}

/// Axis-parallel ellipsoid `sum_j (x_j - c_j)^2 / s_j <= 1` with squared
/// semi-axes `s_j > 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawEllipsoid")]
pub struct AxisEllipsoid {
    #[serde(rename = "c")]
    center: RationalVector,
    #[serde(rename = "s")]
    sq_semi_axes: RationalVector,
}

#[derive(Deserialize)]
struct RawEllipsoid {
    c: RationalVector,
    s: RationalVector,
}

impl TryFrom<RawEllipsoid> for AxisEllipsoid {
    type Error = Error;

    fn try_from(raw: RawEllipsoid) -> Result<Self> {
        AxisEllipsoid::new(raw.c, raw.s)
    }
}

impl AxisEllipsoid {
    pub fn new(center: RationalVector, sq_semi_axes: RationalVector) -> Result<Self> {
        sq_semi_axes.check_dim(center.dim())?;
        if center.dim() == 0 {
            return Err(Error::InvalidEllipsoid("zero-dimensional ellipsoid".into()));
        }
        if let Some(j) = sq_semi_axes.iter().position(|s| !s.is_positive()) {
            return Err(Error::InvalidEllipsoid(format!(
                "squared semi-axis {j} is not positive"
            )));
        }
        Ok(Self { center, sq_semi_axes })
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn center(&self) -> &RationalVector {
        &self.center
    }

    pub fn sq_semi_axes(&self) -> &RationalVector {
        &self.sq_semi_axes
    }

    pub fn contains(&self, x: &RationalVector) -> Result<bool> {
        x.check_dim(self.dim())?;
        let sum: Rational = (0..self.dim())
            .map(|j| {
                let d = &x[j] - &self.center[j];
                &d * &d / &self.sq_semi_axes[j]
            })
            .sum();
        Ok(sum <= Rational::one())
    }

    /// An axis ellipsoid lies in a box iff each semi-axis fits on both sides
    /// of the center.
    pub fn inside_box(&self, outer: &AxisBox) -> bool {
        if outer.dim() != self.dim() {
            return false;
        }
        (0..self.dim()).all(|j| {
            let c = &self.center[j];
            let s = &self.sq_semi_axes[j];
            let below = c - &outer.lower()[j];
            let above = &outer.upper()[j] - c;
            !below.is_negative() && !above.is_negative() && &(&below * &below) >= s && &(&above * &above) >= s
        })
    }

    pub fn in_positive_orthant(&self) -> bool {
        (0..self.dim()).all(|j| {
            let c = &self.center[j];
            !c.is_negative() && c * c >= self.sq_semi_axes[j]
        })
    }
}
