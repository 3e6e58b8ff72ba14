//! Brute-force references that share no code with the library's solvers:
//! plain `i128` arithmetic, cofactor determinants and exhaustive sweeps.

#![allow(dead_code)]

use cubecover::linalg::{Rational, RationalMatrix, RationalVector};
use num_integer::Integer;
use num_traits::ToPrimitive;

/// Every coefficient box is at least `[-SWEEP_FLOOR, SWEEP_FLOOR]^n`.
pub const SWEEP_FLOOR: i128 = 20;

fn small(x: &num_bigint::BigInt) -> i128 {
    x.to_i128().expect("test values fit in i128")
}

fn lcm_of<'a>(xs: impl IntoIterator<Item = &'a Rational>) -> i128 {
    xs.into_iter().fold(1i128, |acc, x| acc.lcm(&small(x.denom())))
}

fn scaled(x: &Rational, by: i128) -> i128 {
    small(x.numer()) * (by / small(x.denom()))
}

pub fn det(m: &[Vec<i128>]) -> i128 {
    let n = m.len();
    if n == 1 {
        return m[0][0];
    }
    (0..n)
        .map(|j| {
            let sign = if j % 2 == 0 { 1 } else { -1 };
            sign * m[0][j] * det(&minor(m, 0, j))
        })
        .sum()
}

fn minor(m: &[Vec<i128>], row: usize, col: usize) -> Vec<Vec<i128>> {
    m.iter()
        .enumerate()
        .filter(|&(i, _)| i != row)
        .map(|(_, r)| r.iter().enumerate().filter(|&(j, _)| j != col).map(|(_, &x)| x).collect())
        .collect()
}

/// `adj(M)` with `M adj(M) = det(M) I`.
pub fn adjugate(m: &[Vec<i128>]) -> Vec<Vec<i128>> {
    let n = m.len();
    if n == 1 {
        return vec![vec![1]];
    }
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
                    sign * det(&minor(m, j, i))
                })
                .collect()
        })
        .collect()
}

/// Ranges for `x` covering every integer solution of `|2 M x - p|_j <= q_j`.
///
/// Such an `x` equals `adj(M) (p + e) / (2 det M)` for some `|e_j| <= q_j`,
/// so `x_i` is within `sum_j |adj_ij| q_j / (2 |det|)` of `(adj p)_i / (2 det)`.
/// The box is then widened to at least `[-SWEEP_FLOOR, SWEEP_FLOOR]`.
pub fn coefficient_box(m: &[Vec<i128>], p: &[i128], q: &[i128]) -> Vec<(i128, i128)> {
    let d = det(m);
    assert_ne!(d, 0, "singular matrix");
    let adj = adjugate(m);
    let (den, sign) = (2 * d.abs(), d.signum());
    (0..m.len())
        .map(|i| {
            let center: i128 = sign * adj[i].iter().zip(p).map(|(a, b)| a * b).sum::<i128>();
            let reach: i128 = adj[i].iter().zip(q).map(|(a, b)| a.abs() * b).sum();
            let lo = Integer::div_floor(&(center - reach), &den);
            let hi = Integer::div_ceil(&(center + reach), &den);
            (lo.min(-SWEEP_FLOOR), hi.max(SWEEP_FLOOR))
        })
        .collect()
}

fn sweep(ranges: &[(i128, i128)], mut visit: impl FnMut(&[i128]) -> bool) {
    let mut x: Vec<i128> = ranges.iter().map(|r| r.0).collect();
    loop {
        if !visit(&x) {
            return;
        }
        let mut j = 0;
        loop {
            if j == x.len() {
                return;
            }
            if x[j] < ranges[j].1 {
                x[j] += 1;
                break;
            }
            x[j] = ranges[j].0;
            j += 1;
        }
    }
}

fn apply(m: &[Vec<i128>], x: &[i128]) -> Vec<i128> {
    m.iter().map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}

/// `min_x ||A x - t||_inf` by sweeping a coefficient box around `A^{-1} t`
/// sized from the distance of the origin.
pub fn brute_cvp_dist(basis: &RationalMatrix, target: &RationalVector) -> Rational {
    let n = basis.dim();
    let l = lcm_of(basis.rows().iter().flatten().chain(target.iter()));
    let m: Vec<Vec<i128>> = basis.rows().iter().map(|r| r.iter().map(|x| scaled(x, l)).collect()).collect();
    let s: Vec<i128> = target.iter().map(|x| scaled(x, l)).collect();
    let radius = s.iter().map(|x| x.abs()).max().unwrap_or(0);
    let p: Vec<i128> = s.iter().map(|x| 2 * x).collect();
    let ranges = coefficient_box(&m, &p, &vec![2 * radius; n]);
    let mut best = i128::MAX;
    sweep(&ranges, |x| {
        let d = apply(&m, x).iter().zip(&s).map(|(a, b)| (a - b).abs()).max().unwrap_or(0);
        best = best.min(d);
        true
    });
    Rational::new(best.into(), l.into())
}

/// Whether some integer `x` satisfies `l <= A x <= u`.
pub fn brute_slab_feasible(a: &RationalMatrix, l: &RationalVector, u: &RationalVector) -> bool {
    let s = lcm_of(a.rows().iter().flatten().chain(l.iter()).chain(u.iter()));
    let m: Vec<Vec<i128>> = a.rows().iter().map(|r| r.iter().map(|x| scaled(x, s)).collect()).collect();
    let lo: Vec<i128> = l.iter().map(|x| scaled(x, s)).collect();
    let hi: Vec<i128> = u.iter().map(|x| scaled(x, s)).collect();
    let p: Vec<i128> = lo.iter().zip(&hi).map(|(a, b)| a + b).collect();
    let q: Vec<i128> = lo.iter().zip(&hi).map(|(a, b)| b - a).collect();
    let ranges = coefficient_box(&m, &p, &q);
    let mut found = false;
    sweep(&ranges, |x| {
        let y = apply(&m, x);
        found = (0..y.len()).all(|j| lo[j] <= y[j] && y[j] <= hi[j]);
        !found
    });
    found
}
