//! Exact rational scalars, vectors and square matrices.
//!
//! Every quantity in the crate is an arbitrary-precision rational kept in
//! canonical form (reduced, positive denominator). Rationals serialize as the
//! string `"p/q"`, or `"p"` when the denominator is one.

use std::fmt;
use std::ops::Index;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::de::{self, Deserializer};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Shorthand for `n/d` with machine-sized parts.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|e| Error::Parse(format!("`{s}`: {e}")))?;
        let q = BigInt::from_str(q.trim()).map_err(|e| Error::Parse(format!("`{s}`: {e}")))?;
        if q.is_zero() {
            return Err(Error::Parse(format!("`{s}`: zero denominator")));
        }
        Ok(Rational::new(p, q))
    } else {
        BigInt::from_str(s)
            .map(Rational::from_integer)
            .map_err(|e| Error::Parse(format!("`{s}`: {e}")))
    }
}

/// `base^exp` for any integer exponent; `base` must be nonzero when `exp < 0`.
pub fn pow(base: &Rational, exp: i64) -> Rational {
    let p = num_traits::pow(base.clone(), exp.unsigned_abs() as usize);
    if exp < 0 {
        p.recip()
    } else {
        p
    }
}

pub fn is_integral(x: &Rational) -> bool {
    x.denom().is_one()
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RationalRepr {
    Text(String),
    Int(i64),
}

impl RationalRepr {
    fn into_rational<E: de::Error>(self) -> std::result::Result<Rational, E> {
        match self {
            RationalRepr::Text(s) => parse_rational(&s).map_err(E::custom),
            RationalRepr::Int(i) => Ok(int(i)),
        }
    }
}

/// Serde adapter for a single [`Rational`] field (`#[serde(with = "serde_rational")]`).
pub mod serde_rational {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        RationalRepr::deserialize(d)?.into_rational()
    }
}

/// Serde adapter for an optional [`Rational`] field.
pub mod serde_rational_opt {
    use super::*;

    pub fn serialize<S: Serializer>(
        x: &Option<Rational>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        match x {
            Some(x) => s.serialize_some(&x.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Option<Rational>, D::Error> {
        Option::<RationalRepr>::deserialize(d)?
            .map(RationalRepr::into_rational)
            .transpose()
    }
}

/// Serde adapter for integer vectors, written as decimal strings.
pub mod serde_bigints {
    use super::*;

    pub fn serialize<S: Serializer>(xs: &[BigInt], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(xs.len()))?;
        for x in xs {
            seq.serialize_element(&x.to_string())?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<BigInt>, D::Error> {
        Vec::<RationalRepr>::deserialize(d)?
            .into_iter()
            .map(|r| {
                let q = r.into_rational::<D::Error>()?;
                if !is_integral(&q) {
                    return Err(de::Error::custom(format!("expected an integer, got {q}")));
                }
                Ok(q.to_integer())
            })
            .collect()
    }
}

/// A finite vector of exact rationals.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RationalVector(Vec<Rational>);

impl RationalVector {
    pub fn new(entries: Vec<Rational>) -> Self {
        Self(entries)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![Rational::zero(); dim])
    }

    pub fn filled(dim: usize, value: Rational) -> Self {
        Self(vec![value; dim])
    }

    pub fn from_ints(xs: &[i64]) -> Self {
        Self(xs.iter().map(|&x| int(x)).collect())
    }

    pub fn from_bigints(xs: &[BigInt]) -> Self {
        Self(xs.iter().cloned().map(Rational::from_integer).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[Rational] {
        &self.0
    }

    pub fn into_entries(self) -> Vec<Rational> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Rational> {
        self.0.iter()
    }

    pub fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() == expected {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, found: self.dim() })
        }
    }

    pub fn sub(&self, other: &RationalVector) -> RationalVector {
        debug_assert_eq!(self.dim(), other.dim());
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn add(&self, other: &RationalVector) -> RationalVector {
        debug_assert_eq!(self.dim(), other.dim());
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn scale(&self, k: &Rational) -> RationalVector {
        Self(self.0.iter().map(|a| a * k).collect())
    }

    /// Maximum absolute coordinate.
    pub fn inf_norm(&self) -> Rational {
        self.0
            .iter()
            .map(|x| x.abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }

    pub fn is_integral(&self) -> bool {
        self.0.iter().all(is_integral)
    }
}

/// Free-function form of [`RationalVector::inf_norm`].
pub fn inf_norm(v: &RationalVector) -> Rational {
    v.inf_norm()
}

impl Index<usize> for RationalVector {
    type Output = Rational;

    fn index(&self, i: usize) -> &Rational {
        &self.0[i]
    }
}

impl FromIterator<Rational> for RationalVector {
    fn from_iter<I: IntoIterator<Item = Rational>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl fmt::Display for RationalVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for RationalVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.0.len()))?;
        for x in &self.0 {
            seq.serialize_element(&x.to_string())?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for RationalVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Vec::<RationalRepr>::deserialize(d)?
            .into_iter()
            .map(RationalRepr::into_rational)
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(RationalVector)
    }
}

/// A square matrix of exact rationals, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalMatrix {
    n: usize,
    rows: Vec<Vec<Rational>>,
}

impl RationalMatrix {
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::NotSquare);
        }
        Ok(Self { n, rows })
    }

    pub fn from_int_rows(rows: &[&[i64]]) -> Result<Self> {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect())
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&RationalVector::filled(n, Rational::one()))
    }

    pub fn diagonal(diag: &RationalVector) -> Self {
        let n = diag.dim();
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { diag[i].clone() } else { Rational::zero() })
                    .collect()
            })
            .collect();
        Self { n, rows }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.rows[i][j]
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.rows
    }

    pub fn column(&self, j: usize) -> RationalVector {
        self.rows.iter().map(|r| r[j].clone()).collect()
    }

    pub fn mul_vec(&self, x: &RationalVector) -> Result<RationalVector> {
        x.check_dim(self.n)?;
        Ok(self
            .rows
            .iter()
            .map(|r| r.iter().zip(x.iter()).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn mul(&self, other: &RationalMatrix) -> Result<RationalMatrix> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        let rows = (0..self.n)
            .map(|i| {
                (0..self.n)
                    .map(|j| (0..self.n).map(|k| &self.rows[i][k] * &other.rows[k][j]).sum())
                    .collect()
            })
            .collect();
        Ok(Self { n: self.n, rows })
    }

    pub fn scale(&self, k: &Rational) -> RationalMatrix {
        Self {
            n: self.n,
            rows: self.rows.iter().map(|r| r.iter().map(|a| a * k).collect()).collect(),
        }
    }

    /// Multiplies column `j` by `factors[j]`.
    pub fn scale_columns(&self, factors: &[Rational]) -> RationalMatrix {
        Self {
            n: self.n,
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().zip(factors).map(|(a, f)| a * f).collect())
                .collect(),
        }
    }

    /// Multiplies row `i` by `factors[i]`.
    pub fn scale_rows(&self, factors: &[Rational]) -> RationalMatrix {
        Self {
            n: self.n,
            rows: self.rows.iter().zip(factors).map(|(r, f)| r.iter().map(|a| a * f).collect()).collect(),
        }
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| i == j || self.rows[i][j].is_zero()))
    }

    /// Exact solution of `self · x = b` by Gaussian elimination, taking the
    /// first nonzero pivot in row order.
    pub fn solve(&self, b: &RationalVector) -> Result<RationalVector> {
        b.check_dim(self.n)?;
        let n = self.n;
        let mut aug: Vec<Vec<Rational>> = self
            .rows
            .iter()
            .zip(b.iter())
            .map(|(r, bi)| {
                let mut row = r.clone();
                row.push(bi.clone());
                row
            })
            .collect();
        eliminate(&mut aug, n)?;
        let mut x = vec![Rational::zero(); n];
        for i in (0..n).rev() {
            let mut acc = aug[i][n].clone();
            for j in i + 1..n {
                acc -= &aug[i][j] * &x[j];
            }
            x[i] = acc / &aug[i][i];
        }
        Ok(RationalVector(x))
    }

    /// Exact inverse via Gauss-Jordan elimination.
    pub fn invert(&self) -> Result<RationalMatrix> {
        let n = self.n;
        let mut aug: Vec<Vec<Rational>> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let mut row = r.clone();
                row.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
                row
            })
            .collect();
        eliminate(&mut aug, n)?;
        for i in (0..n).rev() {
            let p = aug[i][i].clone();
            for v in aug[i].iter_mut() {
                *v /= &p;
            }
            for k in 0..i {
                let f = aug[k][i].clone();
                if f.is_zero() {
                    continue;
                }
                for j in i..2 * n {
                    let d = &f * &aug[i][j];
                    aug[k][j] -= d;
                }
            }
        }
        Ok(Self { n, rows: aug.into_iter().map(|r| r[n..].to_vec()).collect() })
    }

    pub fn determinant(&self) -> Rational {
        let mut a = self.rows.clone();
        let n = self.n;
        let mut det = Rational::one();
        for col in 0..n {
            let Some(p) = (col..n).find(|&r| !a[r][col].is_zero()) else {
                return Rational::zero();
            };
            if p != col {
                a.swap(p, col);
                det = -det;
            }
            det *= &a[col][col];
            for r in col + 1..n {
                let f = &a[r][col] / &a[col][col];
                if f.is_zero() {
                    continue;
                }
                for j in col..n {
                    let d = &f * &a[col][j];
                    a[r][j] -= d;
                }
            }
        }
        det
    }

    pub fn is_singular(&self) -> bool {
        self.determinant().is_zero()
    }

    /// Least common multiple of all entry denominators.
    pub fn denominator_lcm(&self) -> BigInt {
        self.rows
            .iter()
            .flatten()
            .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
    }
}

/// Forward elimination to upper-triangular form over the first `n` columns.
fn eliminate(aug: &mut [Vec<Rational>], n: usize) -> Result<()> {
    let width = aug.first().map_or(0, Vec::len);
    for col in 0..n {
        let p = (col..n)
            .find(|&r| !aug[r][col].is_zero())
            .ok_or(Error::SingularMatrix)?;
        aug.swap(p, col);
        for r in col + 1..n {
            if aug[r][col].is_zero() {
                continue;
            }
            let f = &aug[r][col] / &aug[col][col];
            for j in col..width {
                let d = &f * &aug[col][j];
                aug[r][j] -= d;
            }
        }
    }
    Ok(())
}

/// Free-function form of [`RationalMatrix::solve`].
pub fn solve(m: &RationalMatrix, b: &RationalVector) -> Result<RationalVector> {
    m.solve(b)
}

/// Free-function form of [`RationalMatrix::invert`].
pub fn invert(m: &RationalMatrix) -> Result<RationalMatrix> {
    m.invert()
}

impl Serialize for RationalMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.n))?;
        for r in &self.rows {
            seq.serialize_element(&RationalVector(r.clone()))?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for RationalMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<RationalVector>::deserialize(d)?;
        RationalMatrix::from_rows(rows.into_iter().map(|r| r.0).collect())
            .map_err(de::Error::custom)
    }
}
