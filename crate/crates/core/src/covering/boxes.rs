use num_traits::{One, Signed};

use super::{
    exponent_bound, BodyStream, CoverBody, CoverIndex, CoverKind, CoverScheme, CoverSpec,
    IndexOdometer,
};
use crate::error::{Error, Result};
use crate::geometry::{AxisBox, Parallelepiped};
use crate::linalg::{int, pow, Rational, RationalVector};

/// `[1 - 3^{-a}, 1 - 3^{-a-1}]`: one axis of the box `U(alpha)`.
pub fn u_interval(a: u32) -> (Rational, Rational) {
    let three = int(3);
    let p = pow(&three, -i64::from(a));
    let one = Rational::one();
    (&one - &p, &one - &p / &three)
}

/// Lazy stream of the orthant-wise parallelepiped covering of `H_eps`.
#[derive(Clone, Debug)]
pub struct BoxCover {
    intervals: Vec<(Rational, Rational)>,
    odometer: IndexOdometer,
}

/// Covering of `H_eps` by the boxes `sigma * U(alpha)` with
/// `3^{-alpha_j} > eps`, each as an axis-aligned parallelepiped whose double
/// stays inside `H`.
pub fn gen_box_cover(dim: usize, eps: &Rational) -> Result<BoxCover> {
    if dim == 0 {
        return Err(Error::Config("covering dimension must be at least 1".into()));
    }
    let a = exponent_bound(eps, 3)?;
    Ok(BoxCover {
        intervals: (0..=a).map(u_interval).collect(),
        odometer: IndexOdometer::new(dim, a + 1),
    })
}

impl BoxCover {
    pub fn body_box(&self, index: &CoverIndex) -> AxisBox {
        let (lower, upper): (Vec<_>, Vec<_>) = index
            .exponents
            .iter()
            .zip(&index.orthant)
            .map(|(&a, &s)| {
                let (lo, hi) = &self.intervals[a as usize];
                if s > 0 {
                    (lo.clone(), hi.clone())
                } else {
                    (-hi, -lo)
                }
            })
            .unzip();
        AxisBox::new(RationalVector::new(lower), RationalVector::new(upper))
            .expect("U(alpha) boxes are well formed")
    }
}

impl Iterator for BoxCover {
    type Item = (CoverIndex, Parallelepiped);

    fn next(&mut self) -> Option<Self::Item> {
        let index = self.odometer.next()?;
        let body = Parallelepiped::from_box(&self.body_box(&index))
            .expect("U(alpha) boxes have positive width");
        Some((index, body))
    }
}

pub struct ParallelepipedScheme;

impl CoverScheme for ParallelepipedScheme {
    fn name(&self) -> &'static str {
        "box"
    }

    fn kind(&self) -> CoverKind {
        CoverKind::BoxParallelepiped
    }

    fn spec(&self, dim: usize, eps: &Rational) -> Result<CoverSpec> {
        let a = exponent_bound(eps, 3)?;
        CoverSpec::new(dim, eps, CoverKind::BoxParallelepiped, u64::from(a) + 1)
    }

    fn bodies(&self, dim: usize, eps: &Rational) -> Result<BodyStream> {
        Ok(Box::new(gen_box_cover(dim, eps)?.map(|(i, p)| (i, CoverBody::Parallelepiped(p)))))
    }

    fn locate(&self, dim: usize, eps: &Rational, x: &RationalVector) -> Option<CoverIndex> {
        if x.dim() != dim {
            return None;
        }
        let a_max = exponent_bound(eps, 3).ok()?;
        let mut index = CoverIndex { orthant: Vec::with_capacity(dim), exponents: Vec::with_capacity(dim) };
        for xj in x.iter() {
            index.orthant.push(if xj.is_negative() { -1 } else { 1 });
            let r = xj.abs();
            let a = (0..=a_max).find(|&a| r <= u_interval(a).1).unwrap_or(a_max);
            index.exponents.push(a);
        }
        Some(index)
    }
}
