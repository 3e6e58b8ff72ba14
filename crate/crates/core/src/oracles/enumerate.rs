//! Exact closest-vector search in the max norm by depth-first enumeration
//! over basis coefficients.
//!
//! The instance is scaled by the common denominator of basis and target, so
//! every candidate residual and distance is an integer. Coefficient `x_i`
//! starts in the box `c_i +- D w_i`, with `c = A^{-1} t` and `w_i` the absolute
//! row sum of `A^{-1}`. At depth `k` each row's constraint
//! `|r_j + a_jk x_k + sum_{i>k} a_ji x_i| <= D` is propagated with interval
//! arithmetic over the still-free coefficients, which narrows `x_k` further
//! and makes the last level exact.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::{Rational, RationalMatrix, RationalVector};

pub const DEFAULT_DIMENSION_LIMIT: usize = 8;

/// A lattice vector with its coefficients and exact distance to the target.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CvpSolution {
    pub vector: RationalVector,
    pub coeffs: Vec<BigInt>,
    pub dist: Rational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchOrder {
    Ascending,
    Descending,
}

/// A prepared instance: scaled integer basis, target, and coefficient box.
#[derive(Clone, Debug)]
pub struct Enumerator {
    n: usize,
    basis: RationalMatrix,
    /// Row-major scaled basis `M = L A`.
    a: Vec<Vec<BigInt>>,
    /// Scaled target `L t`.
    t: Vec<BigInt>,
    scale: BigInt,
    /// `|det M|`; `M^{-1} = adj / det` with the sign folded into `adj`.
    det: BigInt,
    /// `adj (L t)`, so `A^{-1} t = center / det`.
    center: Vec<BigInt>,
    /// Absolute row sums of `adj`.
    width: Vec<BigInt>,
}

/// `(adj, det)` with `M^{-1} = adj / det` and `det > 0`, by fraction-free
/// Gauss-Jordan elimination (every division is exact).
fn integer_inverse(m: &[Vec<BigInt>]) -> Option<(Vec<Vec<BigInt>>, BigInt)> {
    let n = m.len();
    let mut aug: Vec<Vec<BigInt>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }));
            r
        })
        .collect();
    let mut prev = BigInt::one();
    for k in 0..n {
        let p = (k..n).find(|&r| !aug[r][k].is_zero())?;
        aug.swap(k, p);
        for i in (0..n).filter(|&i| i != k) {
            for j in (0..2 * n).filter(|&j| j != k) {
                let v = &aug[k][k] * &aug[i][j] - &aug[i][k] * &aug[k][j];
                aug[i][j] = v / &prev;
            }
            aug[i][k] = BigInt::zero();
        }
        prev = aug[k][k].clone();
    }
    let negate = prev.is_negative();
    let adj = aug
        .into_iter()
        .map(|row| row.into_iter().skip(n).map(|x| if negate { -x } else { x }).collect())
        .collect();
    Some((adj, prev.abs()))
}

impl Enumerator {
    pub fn new(basis: &RationalMatrix, target: &RationalVector) -> Result<Self> {
        Self::with_limit(basis, target, DEFAULT_DIMENSION_LIMIT)
    }

    pub fn with_limit(basis: &RationalMatrix, target: &RationalVector, limit: usize) -> Result<Self> {
        let n = basis.dim();
        target.check_dim(n)?;
        if n > limit {
            return Err(Error::DimensionLimitExceeded { dim: n, limit });
        }
        let scale = target
            .iter()
            .fold(basis.denominator_lcm(), |acc, x| acc.lcm(x.denom()));
        let to_int = |x: &Rational| x.numer() * (&scale / x.denom());
        let a: Vec<Vec<BigInt>> = basis.rows().iter().map(|r| r.iter().map(to_int).collect()).collect();
        let t: Vec<BigInt> = target.iter().map(to_int).collect();
        let (adj, det) = integer_inverse(&a).ok_or(Error::SingularBasis)?;
        let center = adj.iter().map(|r| r.iter().zip(&t).map(|(x, y)| x * y).sum()).collect();
        let width = adj.iter().map(|r| r.iter().map(|x| x.abs()).sum()).collect();
        Ok(Self { n, basis: basis.clone(), a, t, scale, det, center, width })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `A^{-1} t`, the real coefficient vector of the target.
    pub fn target_coefficients(&self) -> Vec<Rational> {
        self.center.iter().map(|c| Rational::new(c.clone(), self.det.clone())).collect()
    }

    /// Scaled integer distance of `A x` to `t`.
    fn scaled_dist(&self, x: &[BigInt]) -> BigInt {
        (0..self.n)
            .map(|j| {
                let s: BigInt = (0..self.n).map(|i| &self.a[j][i] * &x[i]).sum();
                (s - &self.t[j]).abs()
            })
            .max()
            .unwrap_or_else(BigInt::zero)
    }

    fn solution(&self, coeffs: Vec<BigInt>, scaled: &BigInt) -> CvpSolution {
        let vector = self
            .basis
            .mul_vec(&RationalVector::from_bigints(&coeffs))
            .expect("dimensions agree");
        CvpSolution { vector, coeffs, dist: Rational::new(scaled.clone(), self.scale.clone()) }
    }

    fn scaled_radius(&self, radius: &Rational) -> Option<BigInt> {
        if radius.is_negative() {
            return None;
        }
        Some((radius * Rational::from_integer(self.scale.clone())).floor().to_integer())
    }

    /// A closest lattice vector, lexicographically smallest in its
    /// coefficients among all minimizers; restricted to distance at most
    /// `radius` when one is given.
    pub fn closest(&self, radius: Option<&Rational>) -> Option<CvpSolution> {
        if self.center.iter().all(|c| c.is_multiple_of(&self.det)) {
            let coeffs: Vec<BigInt> = self.center.iter().map(|c| c / &self.det).collect();
            return Some(self.solution(coeffs, &BigInt::zero()));
        }
        let limit = match radius {
            Some(r) => Some(self.scaled_radius(r)?),
            None => None,
        };
        let rounded: Vec<BigInt> = self.target_coefficients().iter().map(|c| c.round().to_integer()).collect();
        let rounded_dist = self.scaled_dist(&rounded);
        let mut search = Search::new(self, SearchOrder::Ascending, false);
        match &limit {
            Some(l) if *l < rounded_dist => search.set_radius(l.clone()),
            _ => {
                search.set_radius(rounded_dist.clone());
                search.best = Some((rounded_dist, rounded));
            }
        }
        search.run(0);
        search.best.map(|(d, x)| self.solution(x, &d))
    }

    /// The first lattice vector within `radius` in the given coefficient order.
    pub fn first_within(&self, radius: &Rational, order: SearchOrder) -> Option<CvpSolution> {
        let limit = self.scaled_radius(radius)?;
        let mut search = Search::new(self, order, true);
        search.set_radius(limit);
        search.run(0);
        search.best.map(|(d, x)| self.solution(x, &d))
    }
}

struct Search<'a> {
    e: &'a Enumerator,
    order: SearchOrder,
    stop_at_first: bool,
    radius: BigInt,
    /// Per-coefficient box `[lo, hi]` at the current radius.
    bounds: Vec<(BigInt, BigInt)>,
    /// `suffix[k][j]`: interval of `sum_{i>k} a_ji x_i` over the boxes.
    suffix: Vec<Vec<(BigInt, BigInt)>>,
    coeffs: Vec<BigInt>,
    best: Option<(BigInt, Vec<BigInt>)>,
    found_by_search: bool,
}

impl<'a> Search<'a> {
    fn new(e: &'a Enumerator, order: SearchOrder, stop_at_first: bool) -> Self {
        Self {
            e,
            order,
            stop_at_first,
            radius: BigInt::zero(),
            bounds: Vec::new(),
            suffix: Vec::new(),
            coeffs: vec![BigInt::zero(); e.n],
            best: None,
            found_by_search: false,
        }
    }

    fn set_radius(&mut self, radius: BigInt) {
        let n = self.e.n;
        let det = &self.e.det;
        self.bounds = (0..n)
            .map(|i| {
                let spread = &radius * &self.e.width[i];
                (
                    Integer::div_ceil(&(&self.e.center[i] - &spread), det),
                    Integer::div_floor(&(&self.e.center[i] + &spread), det),
                )
            })
            .collect();
        self.suffix = vec![vec![(BigInt::zero(), BigInt::zero()); n]; n];
        for k in (0..n.saturating_sub(1)).rev() {
            for j in 0..n {
                let (lo, hi) = &self.bounds[k + 1];
                let a = &self.e.a[j][k + 1];
                let (p, q) = (a * lo, a * hi);
                let (mn, mx) = if p <= q { (p, q) } else { (q, p) };
                let (slo, shi) = self.suffix[k + 1][j].clone();
                self.suffix[k][j] = (slo + mn, shi + mx);
            }
        }
        self.radius = radius;
    }

    /// Feasible integer range of `x_k` given the residual of the fixed prefix.
    fn range(&self, k: usize, residual: &[BigInt]) -> Option<(BigInt, BigInt)> {
        let (mut lo, mut hi) = self.bounds[k].clone();
        for j in 0..self.e.n {
            let (smin, smax) = &self.suffix[k][j];
            let low = -&self.radius - &residual[j] - smax;
            let high = &self.radius - &residual[j] - smin;
            let a = &self.e.a[j][k];
            match a.sign() {
                num_bigint::Sign::NoSign => {
                    if low.is_positive() || high.is_negative() {
                        return None;
                    }
                }
                num_bigint::Sign::Plus => {
                    lo = lo.max(Integer::div_ceil(&low, a));
                    hi = hi.min(Integer::div_floor(&high, a));
                }
                num_bigint::Sign::Minus => {
                    lo = lo.max(Integer::div_ceil(&high, a));
                    hi = hi.min(Integer::div_floor(&low, a));
                }
            }
            if lo > hi {
                return None;
            }
        }
        Some((lo, hi))
    }

    fn run(&mut self, k: usize) -> bool {
        let n = self.e.n;
        let residual: Vec<BigInt> = (0..n)
            .map(|j| {
                (0..k).map(|i| &self.e.a[j][i] * &self.coeffs[i]).sum::<BigInt>() - &self.e.t[j]
            })
            .collect();
        if k == n {
            return self.leaf(&residual);
        }
        let mut prev: Option<BigInt> = None;
        loop {
            // Re-derived every step: the radius shrinks whenever a closer leaf turns up.
            let Some((lo, hi)) = self.range(k, &residual) else {
                return false;
            };
            let x = match (self.order, prev.take()) {
                (SearchOrder::Ascending, None) => lo.clone(),
                (SearchOrder::Ascending, Some(p)) => (p + 1u32).max(lo.clone()),
                (SearchOrder::Descending, None) => hi.clone(),
                (SearchOrder::Descending, Some(p)) => (p - 1u32).min(hi.clone()),
            };
            if x < lo || x > hi {
                return false;
            }
            self.coeffs[k] = x.clone();
            if self.run(k + 1) {
                return true;
            }
            prev = Some(x);
        }
    }

    fn leaf(&mut self, residual: &[BigInt]) -> bool {
        let dist = residual.iter().map(|r| r.abs()).max().unwrap_or_else(BigInt::zero);
        if dist > self.radius {
            return false;
        }
        if self.stop_at_first {
            self.best = Some((dist, self.coeffs.clone()));
            return true;
        }
        let better = match &self.best {
            None => true,
            Some((d, x)) => match dist.cmp(d) {
                Ordering::Less => true,
                Ordering::Equal => self.coeffs < *x,
                Ordering::Greater => false,
            },
        };
        if better {
            self.best = Some((dist.clone(), self.coeffs.clone()));
        }
        // Coefficients are visited in increasing lexicographic order, so once
        // a searched leaf holds the incumbent only strictly closer ones matter.
        if !self.found_by_search || better {
            self.found_by_search = true;
            let next = dist - BigInt::one();
            if next.is_negative() {
                // Distance zero cannot be beaten.
                self.radius = next;
                return true;
            }
            if next != self.radius {
                self.set_radius(next);
            }
        }
        false
    }
}

/// A closest lattice vector of `Lambda(basis)` to `target` in the max norm.
pub fn exact_cvp(basis: &RationalMatrix, target: &RationalVector) -> Result<CvpSolution> {
    Ok(Enumerator::new(basis, target)?
        .closest(None)
        .expect("an unrestricted search always finds a vector"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::strategy::Strategy;
    use crate::linalg::{int, rat};

    fn bi(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn integer_lattice_rounding() {
        let s = exact_cvp(&RationalMatrix::identity(2), &RationalVector::new(vec![rat(2, 5), rat(2, 5)])).unwrap();
        assert_eq!(s.vector, RationalVector::zeros(2));
        assert_eq!(s.dist, rat(2, 5));

        let s = exact_cvp(&RationalMatrix::identity(1), &RationalVector::new(vec![rat(53, 10)])).unwrap();
        assert_eq!(s.coeffs, bi(&[5]));
        assert_eq!(s.dist, rat(3, 10));
    }

    #[test]
    fn ties_break_lexicographically() {
        // (1/2, 1/2) is equidistant from all four corners of the unit square.
        let s = exact_cvp(&RationalMatrix::identity(2), &RationalVector::new(vec![rat(1, 2), rat(1, 2)])).unwrap();
        assert_eq!(s.coeffs, bi(&[0, 0]));
        assert_eq!(s.dist, rat(1, 2));
        let again = exact_cvp(&RationalMatrix::identity(2), &RationalVector::new(vec![rat(1, 2), rat(1, 2)])).unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn skewed_basis_against_sweep() {
        // Columns (2, 1) and (0, 1).
        let basis = RationalMatrix::from_int_rows(&[&[2, 0], &[1, 1]]).unwrap();
        let target = RationalVector::from_ints(&[1, 0]);
        let s = exact_cvp(&basis, &target).unwrap();
        let mut best: Option<(Rational, Vec<BigInt>)> = None;
        for a in -3..=3 {
            for b in -3..=3 {
                let x = bi(&[a, b]);
                let v = basis.mul_vec(&RationalVector::from_bigints(&x)).unwrap();
                let d = v.sub(&target).inf_norm();
                if best.as_ref().is_none_or(|(bd, bx)| d < *bd || (d == *bd && x < *bx)) {
                    best = Some((d, x));
                }
            }
        }
        let (d, x) = best.unwrap();
        assert_eq!(s.dist, d);
        assert_eq!(s.coeffs, x);
        assert_eq!(s.dist, int(1));
    }

    #[test]
    fn target_in_lattice() {
        let basis = RationalMatrix::from_int_rows(&[&[2, 1], &[0, 3]]).unwrap();
        let target = RationalVector::from_ints(&[6, 6]);
        let s = exact_cvp(&basis, &target).unwrap();
        assert_eq!(s.dist, int(0));
        assert_eq!(s.coeffs, bi(&[2, 2]));
    }

    #[test]
    fn radius_restricted_search() {
        let e = Enumerator::new(&RationalMatrix::identity(2), &RationalVector::new(vec![rat(1, 2), rat(1, 2)])).unwrap();
        assert!(e.closest(Some(&rat(2, 5))).is_none());
        assert_eq!(e.closest(Some(&rat(1, 2))).unwrap().coeffs, bi(&[0, 0]));
        let lo = e.first_within(&int(1), SearchOrder::Ascending).unwrap();
        let hi = e.first_within(&int(1), SearchOrder::Descending).unwrap();
        assert_eq!(lo.coeffs, bi(&[0, 0]));
        assert_eq!(hi.coeffs, bi(&[1, 1]));
        assert!(e.first_within(&rat(1, 3), SearchOrder::Ascending).is_none());
    }

    #[test]
    fn errors() {
        let singular = RationalMatrix::from_int_rows(&[&[1, 2], &[2, 4]]).unwrap();
        assert_eq!(exact_cvp(&singular, &RationalVector::zeros(2)).unwrap_err(), Error::SingularBasis);
        let big = RationalMatrix::identity(9);
        assert_eq!(
            exact_cvp(&big, &RationalVector::zeros(9)).unwrap_err(),
            Error::DimensionLimitExceeded { dim: 9, limit: 8 }
        );
    }

    proptest::proptest! {
        #[test]
        fn integer_inverse_matches_rational(
            (n, entries) in (1usize..=5).prop_flat_map(|n| (proptest::strategy::Just(n), proptest::collection::vec(-6i64..=6, n * n)))
        ) {
            let rows: Vec<Vec<BigInt>> = entries.chunks(n).map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
            let m = RationalMatrix::from_rows(
                rows.iter().map(|r| r.iter().map(|x| Rational::from_integer(x.clone())).collect()).collect(),
            ).unwrap();
            match (integer_inverse(&rows), m.invert()) {
                (None, Err(_)) => {}
                (Some((adj, det)), Ok(inv)) => {
                    proptest::prop_assert!(det.is_positive());
                    proptest::prop_assert_eq!(Rational::from_integer(det.clone()), m.determinant().abs());
                    for i in 0..n {
                        for j in 0..n {
                            proptest::prop_assert_eq!(Rational::new(adj[i][j].clone(), det.clone()), inv.get(i, j).clone());
                        }
                    }
                }
                (a, b) => proptest::prop_assert!(false, "disagree: {:?} vs {:?}", a.is_some(), b.is_ok()),
            }
        }
    }
}
