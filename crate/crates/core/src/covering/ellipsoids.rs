use num_bigint::BigInt;
use num_traits::{One, Signed};

use super::{
    max_exponent, BodyStream, CoverBody, CoverIndex, CoverKind, CoverScheme, CoverSpec,
    IndexOdometer, Threshold,
};
use crate::error::{Error, Result};
use crate::geometry::AxisEllipsoid;
use crate::linalg::{int, pow, rat, Rational, RationalVector};

/// The ratio `1 + 2/(sqrt(n) - 1)` is rounded down to a multiple of `2^-16`.
pub const RATIO_DENOMINATOR_BITS: u32 = 16;

/// Largest `k / 2^16` not exceeding `1 + 2/(sqrt(n) - 1)`.
///
/// With `q = 2^16` and `k > q`, `k/q <= 1 + 2/(sqrt(n)-1)` is equivalent to
/// `(k - q)^2 n <= (k + q)^2`, which is decided in integers.
pub fn rationalized_ratio(n: usize) -> Result<Rational> {
    if n < 2 {
        return Err(Error::DimensionTooSmall(n));
    }
    let q = BigInt::from(1u64 << RATIO_DENOMINATOR_BITS);
    let nn = BigInt::from(n);
    let fits = |k: &BigInt| {
        let below = k - &q;
        let above = k + &q;
        &below * &below * &nn <= &above * &above
    };
    // The ratio is at most 1 + 2/(sqrt 2 - 1) < 6.
    let (mut lo, mut hi) = (q.clone(), &q * 6);
    while &hi - &lo > BigInt::one() {
        let mid: BigInt = (&lo + &hi) / 2;
        if fits(&mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if lo == q {
        return Err(Error::Config(format!(
            "dimension {n} is too large for a 2^-{RATIO_DENOMINATOR_BITS} ratio grid"
        )));
    }
    Ok(Rational::new(lo, q))
}

/// Smallest-ball image around `Q = prod_j [v_j / r, v_j]` in flipped
/// coordinates: center `m v` with `m = (1 + 1/r)/2`, squared semi-axes
/// `n (1 - m)^2 v_j^2`. Every vertex of `Q` lies on its boundary.
pub fn circumscribed_ellipsoid(v: &RationalVector, ratio: &Rational) -> AxisEllipsoid {
    let n = int(v.dim() as i64);
    let m = (Rational::one() + ratio.recip()) * rat(1, 2);
    let gap = Rational::one() - &m;
    let radius_sq = &n * &gap * &gap;
    AxisEllipsoid::new(
        v.scale(&m),
        v.iter().map(|vj| &radius_sq * vj * vj).collect(),
    )
    .expect("v has positive coordinates")
}

/// Lazy stream of the orthant-wise axis-ellipsoid covering of `H_eps`.
#[derive(Clone, Debug)]
pub struct EllipsoidCover {
    ratio: Rational,
    powers: Vec<Rational>,
    odometer: IndexOdometer,
}

/// Covering of `H_eps` by ellipsoids circumscribing the boxes
/// `Q(alpha) = prod [r^{-(alpha_j+1)}, r^{-alpha_j}]` of `[eps, 1]^n`, with
/// the rationalized ratio `r` of [`rationalized_ratio`], carried to each
/// orthant by `x = sigma * (1 - y)`.
pub fn gen_ellipsoid_cover(dim: usize, eps: &Rational) -> Result<EllipsoidCover> {
    let ratio = rationalized_ratio(dim)?;
    let a = max_exponent(eps, &ratio, Threshold::Strict)?;
    Ok(EllipsoidCover {
        powers: (0..=a).map(|k| pow(&ratio, -i64::from(k))).collect(),
        ratio,
        odometer: IndexOdometer::new(dim, a + 1),
    })
}

impl EllipsoidCover {
    pub fn ratio(&self) -> &Rational {
        &self.ratio
    }

    /// The ellipsoid of `index` in flipped `[0, 2]^n` coordinates.
    pub fn flipped_body(&self, index: &CoverIndex) -> AxisEllipsoid {
        let v: RationalVector = index.exponents.iter().map(|&a| self.powers[a as usize].clone()).collect();
        circumscribed_ellipsoid(&v, &self.ratio)
    }
}

impl Iterator for EllipsoidCover {
    type Item = (CoverIndex, AxisEllipsoid);

    fn next(&mut self) -> Option<Self::Item> {
        let index = self.odometer.next()?;
        let flipped = self.flipped_body(&index);
        let center = flipped
            .center()
            .iter()
            .zip(&index.orthant)
            .map(|(c, &s)| (Rational::one() - c) * int(s.into()))
            .collect();
        let body = AxisEllipsoid::new(center, flipped.sq_semi_axes().clone())
            .expect("squared semi-axes stay positive");
        Some((index, body))
    }
}

pub struct EllipsoidScheme;

impl CoverScheme for EllipsoidScheme {
    fn name(&self) -> &'static str {
        "ellipsoid"
    }

    fn kind(&self) -> CoverKind {
        CoverKind::Ellipsoid
    }

    fn spec(&self, dim: usize, eps: &Rational) -> Result<CoverSpec> {
        let ratio = rationalized_ratio(dim)?;
        let a = max_exponent(eps, &ratio, Threshold::Strict)?;
        CoverSpec::new(dim, eps, CoverKind::Ellipsoid, u64::from(a) + 1)
    }

    fn bodies(&self, dim: usize, eps: &Rational) -> Result<BodyStream> {
        Ok(Box::new(gen_ellipsoid_cover(dim, eps)?.map(|(i, e)| (i, CoverBody::Ellipsoid(e)))))
    }

    fn locate(&self, dim: usize, eps: &Rational, x: &RationalVector) -> Option<CoverIndex> {
        if x.dim() != dim {
            return None;
        }
        let ratio = rationalized_ratio(dim).ok()?;
        let a_max = max_exponent(eps, &ratio, Threshold::Strict).ok()?;
        let mut index = CoverIndex { orthant: Vec::with_capacity(dim), exponents: Vec::with_capacity(dim) };
        for xj in x.iter() {
            index.orthant.push(if xj.is_negative() { -1 } else { 1 });
            let y = Rational::one() - xj.abs();
            let mut a = 0;
            let mut lower = ratio.recip();
            while a < a_max && y < lower {
                a += 1;
                lower /= &ratio;
            }
            index.exponents.push(a);
        }
        Some(index)
    }
}
