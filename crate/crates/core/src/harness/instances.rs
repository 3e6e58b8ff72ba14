use num_bigint::BigInt;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::AxisEllipsoid;
use crate::linalg::{int, rat, Rational, RationalMatrix, RationalVector};
use crate::oracles::{LatticeInstance, Slab};

/// The generator behind every seeded stream: ChaCha with 8 rounds, as
/// implemented by `rand_chacha`, seeded through `seed_from_u64`.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for case `index` of a run seeded with `seed`, so a case
/// can be regenerated without replaying the ones before it.
pub fn case_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = seeded_rng(seed);
    rng.set_stream(index);
    rng
}

pub const MAX_TARGET_DENOMINATOR: i64 = 100;

/// Parameters of a random CVP instance stream.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceGen {
    pub seed: u64,
    pub dim: usize,
    pub entry_bound: i64,
    pub count: usize,
}

/// Nonsingular integer basis with entries in `[-bound, bound]`, resampled until
/// its determinant is nonzero.
pub fn random_basis<R: Rng>(rng: &mut R, dim: usize, bound: i64) -> RationalMatrix {
    loop {
        let rows = (0..dim)
            .map(|_| (0..dim).map(|_| int(rng.random_range(-bound..=bound))).collect())
            .collect();
        let m = RationalMatrix::from_rows(rows).expect("square by construction");
        if !m.is_singular() {
            return m;
        }
    }
}

/// `p/q` with `1 <= q <= max_den` and `|p/q| <= bound`.
pub fn random_rational<R: Rng>(rng: &mut R, bound: i64, max_den: i64) -> Rational {
    let q = rng.random_range(1..=max_den);
    let p = rng.random_range(-bound * q..=bound * q);
    rat(p, q)
}

pub fn random_target<R: Rng>(rng: &mut R, dim: usize, bound: i64) -> RationalVector {
    (0..dim).map(|_| random_rational(rng, bound, MAX_TARGET_DENOMINATOR)).collect()
}

pub fn random_instance<R: Rng>(rng: &mut R, dim: usize, bound: i64) -> LatticeInstance {
    let basis = random_basis(rng, dim, bound);
    let target = random_target(rng, dim, bound);
    LatticeInstance::new(basis, target, None).expect("basis is nonsingular")
}

/// Reproducible stream of `count` instances.
pub fn gen_instances(g: &InstanceGen) -> Result<impl Iterator<Item = LatticeInstance>> {
    if g.entry_bound < 1 {
        return Err(Error::Config(format!("entry bound must be at least 1, got {}", g.entry_bound)));
    }
    if g.dim == 0 {
        return Err(Error::Config("instance dimension must be at least 1".into()));
    }
    let mut rng = seeded_rng(g.seed);
    let (dim, bound) = (g.dim, g.entry_bound);
    Ok((0..g.count).map(move |_| random_instance(&mut rng, dim, bound)))
}

/// Distance parameter relative to the true distance `exact`, picked to land on
/// both sides of the `1+eps` gap and on its boundary.
pub fn gap_distance<R: Rng>(rng: &mut R, exact: &Rational, eps: &Rational) -> Rational {
    if *exact == int(0) {
        return rat(1, rng.random_range(1..=8));
    }
    let one = Rational::one();
    let factors = [
        rat(1, 3),
        rat(1, 2),
        rat(9, 10),
        one.clone(),
        &one + eps / int(2),
        &one + eps,
        rat(3, 2),
        int(2),
        int(3),
    ];
    exact * &factors[rng.random_range(0..factors.len())]
}

/// `l <= A x <= u` with integer `A`, and `l`, `u` of denominator at most 10
/// and row widths in `(0, 2]`.
pub fn random_slab<R: Rng>(rng: &mut R, dim: usize, bound: i64) -> Slab {
    let a = random_basis(rng, dim, bound);
    let l: RationalVector = (0..dim).map(|_| random_rational(rng, bound, 10)).collect();
    let u = (0..dim)
        .map(|i| &l[i] + rat(rng.random_range(1..=20), 10))
        .collect();
    Slab { a, l, u }
}

/// Uniform point of `[lo, hi]^dim` on a grid of spacing `(hi - lo) / steps`.
pub fn random_point_in_cube<R: Rng>(rng: &mut R, dim: usize, lo: &Rational, hi: &Rational, steps: u32) -> RationalVector {
    let width = hi - lo;
    (0..dim)
        .map(|_| {
            let k = rng.random_range(0..=steps);
            lo + &width * Rational::new(BigInt::from(k), BigInt::from(steps))
        })
        .collect()
}

/// Axis ellipsoid inside the closed positive orthant: centers `c_j` in
/// `(0, 1]` and squared semi-axes `s_j <= c_j^2`, often touching the walls.
pub fn random_orthant_ellipsoid<R: Rng>(rng: &mut R, dim: usize) -> AxisEllipsoid {
    let mut c = Vec::with_capacity(dim);
    let mut s = Vec::with_capacity(dim);
    for _ in 0..dim {
        let cj = rat(rng.random_range(1..=64), 64) / int(1 << rng.random_range(0..4));
        let shrink = if rng.random_bool(0.5) { Rational::one() } else { rat(rng.random_range(1..=16), 16) };
        s.push(&cj * &cj * shrink);
        c.push(cj);
    }
    AxisEllipsoid::new(RationalVector::new(c), RationalVector::new(s)).expect("positive semi-axes")
}
