use serde::{Deserialize, Serialize};

use super::LatticeInstance;
use crate::error::{Error, Result};
use crate::geometry::Parallelepiped;
use crate::linalg::{rat, RationalMatrix, RationalVector};

/// Reduces a parallelepiped test to a CVP instance: `B = E A`, `t = E d`.
///
/// For `v = A x`, `||E (v - d)||_inf <= s` iff `||B x - t||_inf <= s`, so a
/// lattice point of `A` in the parallelepiped scaled by `s` is a point of
/// `Lambda(B)` within distance `s` of `t`. The distance is left unset.
pub fn transform_instance(basis: &RationalMatrix, p: &Parallelepiped) -> Result<LatticeInstance> {
    if basis.dim() != p.dim() {
        return Err(Error::DimensionMismatch { expected: basis.dim(), found: p.dim() });
    }
    let b = p.map().mul(basis)?;
    let t = p.map().mul_vec(p.center())?;
    LatticeInstance::new(b, t, None).map_err(|e| match e {
        Error::SingularBasis => Error::SingularMatrix,
        e => e,
    })
}

/// The system `l <= A x <= u` over integer `x`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slab {
    #[serde(rename = "A")]
    pub a: RationalMatrix,
    pub l: RationalVector,
    pub u: RationalVector,
}

impl Slab {
    pub fn reduce(&self) -> Result<LatticeInstance> {
        box_ip_to_cvp(&self.a, &self.l, &self.u)
    }
}

/// Integer feasibility of `l <= A x <= u` as a CVP instance.
///
/// Each row is divided by its width `u_i - l_i`, so the slab has unit width,
/// and the target is its midpoint. An integer point exists iff the rescaled
/// lattice has a vector within `1/2` of the target; the instance carries that
/// distance.
pub fn box_ip_to_cvp(a: &RationalMatrix, l: &RationalVector, u: &RationalVector) -> Result<LatticeInstance> {
    let n = a.dim();
    l.check_dim(n)?;
    u.check_dim(n)?;
    if let Some(row) = (0..n).find(|&i| u[i] <= l[i]) {
        return Err(Error::DegenerateSlab { row });
    }
    let half = rat(1, 2);
    let mut rows = Vec::with_capacity(n);
    let mut target = Vec::with_capacity(n);
    for i in 0..n {
        let inv_width = (&u[i] - &l[i]).recip();
        rows.push(a.rows()[i].iter().map(|x| x * &inv_width).collect());
        target.push((&l[i] + &u[i]) * &half * &inv_width);
    }
    LatticeInstance::new(RationalMatrix::from_rows(rows)?, RationalVector::new(target), Some(half))
}
