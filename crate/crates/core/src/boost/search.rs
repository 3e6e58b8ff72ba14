use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::{BoostConfig, BoostedGap};
use crate::error::{Error, Result};
use crate::linalg::{int, pow, rat, serde_bigints, serde_rational, serde_rational_opt, Rational, RationalMatrix, RationalVector};
use crate::oracles::{exact_cvp, GapOracle, GapResult, LatticeInstance};

/// Largest integer `k` with `(1+delta)^k <= value`.
pub fn floor_log1p(value: &Rational, delta: &Rational) -> i64 {
    assert!(*value > Rational::zero() && *delta > Rational::zero(), "floor_log1p needs positive arguments");
    if *value < Rational::one() {
        return -ceil_log1p(&value.recip(), delta);
    }
    let base = Rational::one() + delta;
    let mut hi = 1i64;
    while pow(&base, hi) <= *value {
        hi *= 2;
    }
    // (1+delta)^lo <= value < (1+delta)^hi
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if pow(&base, mid) <= *value {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Smallest integer `k` with `(1+delta)^k >= value`.
pub fn ceil_log1p(value: &Rational, delta: &Rational) -> i64 {
    assert!(*value > Rational::zero() && *delta > Rational::zero(), "ceil_log1p needs positive arguments");
    if *value < Rational::one() {
        return -floor_log1p(&value.recip(), delta);
    }
    let k = floor_log1p(value, delta);
    if pow(&(Rational::one() + delta), k) == *value {
        k
    } else {
        k + 1
    }
}

/// `min(eps/5, 1/2)`: the gap the search asks of its oracle.
pub fn search_delta(eps: &Rational) -> Rational {
    (eps / int(5)).min(rat(1, 2))
}

/// One binary-search step: the probe exponent, the answer, and the bracket after it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStep {
    pub probe: i64,
    pub found: bool,
    pub lower: i64,
    pub upper: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchTrace {
    #[serde(with = "serde_rational")]
    pub delta: Rational,
    pub initial_lower: i64,
    pub initial_upper: i64,
    pub gallop_calls: u64,
    pub steps: Vec<SearchStep>,
    /// Calls made after galloping: one per step plus the final query.
    pub search_calls: u64,
}

impl SearchTrace {
    /// `M_0 = U - L` after galloping.
    pub fn initial_gap(&self) -> i64 {
        self.initial_upper - self.initial_lower
    }

    /// `ceil(log2 max(M_0, 1)) + 2`.
    pub fn search_call_bound(&self) -> u64 {
        u64::from(ceil_log2(self.initial_gap().max(1) as u64)) + 2
    }

    /// Whether `M_j <= M_{j-1}/2 + 1` held at every step.
    pub fn halves_each_step(&self) -> bool {
        let mut prev = self.initial_gap();
        self.steps.iter().all(|s| {
            let m = s.upper - s.lower;
            let ok = 2 * m <= prev + 2;
            prev = m;
            ok
        })
    }
}

fn ceil_log2(m: u64) -> u32 {
    if m <= 1 {
        0
    } else {
        64 - (m - 1).leading_zeros()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApproxResult {
    pub vector: RationalVector,
    #[serde(with = "serde_bigints")]
    pub coeffs: Vec<BigInt>,
    #[serde(with = "serde_rational")]
    pub achieved_dist: Rational,
    /// Gap-oracle calls made by the search, galloping included.
    pub oracle_calls: u64,
    /// Calls to the underlying 2-gap oracle when the gap oracle is boosted.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub base_oracle_calls: Option<u64>,
    #[serde(with = "serde_rational_opt", skip_serializing_if = "Option::is_none", default)]
    pub exact_dist: Option<Rational>,
    #[serde(with = "serde_rational_opt", skip_serializing_if = "Option::is_none", default)]
    pub ratio: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trace: Option<SearchTrace>,
}

impl ApproxResult {
    /// Fills `exact_dist` and `ratio` from the exact solver.
    pub fn audit(mut self, basis: &RationalMatrix, target: &RationalVector) -> Result<Self> {
        let exact = exact_cvp(basis, target)?.dist;
        self.ratio = Some(if exact.is_zero() {
            Rational::one()
        } else {
            &self.achieved_dist / &exact
        });
        self.exact_dist = Some(exact);
        Ok(self)
    }
}

struct Witness {
    vector: RationalVector,
    coeffs: Vec<BigInt>,
    dist: Rational,
}

struct Driver<'a> {
    basis: &'a RationalMatrix,
    target: &'a RationalVector,
    gap: &'a dyn GapOracle,
    calls: u64,
}

impl Driver<'_> {
    fn ask(&mut self, d: Rational) -> Result<Option<Witness>> {
        let inst = LatticeInstance::new(self.basis.clone(), self.target.clone(), Some(d.clone()))?;
        self.calls += 1;
        match self.gap.query(&inst)? {
            GapResult::Empty => Ok(None),
            GapResult::Found { vector, coeffs } => {
                if inst.lattice_vector(&coeffs)? != vector {
                    return Err(Error::GapOracleUnsound(format!("{vector} is not A x for the returned coefficients")));
                }
                let dist = vector.sub(self.target).inf_norm();
                if dist > d {
                    return Err(Error::GapOracleUnsound(format!("witness at distance {dist} exceeds D = {d}")));
                }
                Ok(Some(Witness { vector, coeffs, dist }))
            }
        }
    }
}

fn keep_closer(best: &mut Option<Witness>, w: Witness) {
    if best.as_ref().is_none_or(|b| w.dist < b.dist) {
        *best = Some(w);
    }
}

/// `(1+eps)`-approximate closest vector through a gap oracle of gap at most
/// `1 + min(eps/5, 1/2)`.
///
/// The bracket `(1+delta)^L <= d(t) <= (1+delta)^U` is set up by galloping over
/// powers of two and then halved until `U - L < 3`; a final query at
/// `(1+delta)^{U+1}` yields the answer. Every witness is rechecked exactly.
pub fn approx_cvp(
    basis: &RationalMatrix,
    target: &RationalVector,
    eps: &Rational,
    gap: &dyn GapOracle,
) -> Result<ApproxResult> {
    if *eps <= int(0) || *eps >= int(1) {
        return Err(Error::InvalidEps(eps.to_string()));
    }
    let delta = search_delta(eps);
    if gap.alpha() > Rational::one() + &delta {
        return Err(Error::Config(format!(
            "search needs a gap of at most {}, oracle `{}` has {}",
            Rational::one() + &delta,
            gap.name(),
            gap.alpha()
        )));
    }
    target.check_dim(basis.dim())?;
    let center = basis.solve(target).map_err(|_| Error::SingularBasis)?;
    if center.is_integral() {
        let coeffs: Vec<BigInt> = center.iter().map(|c| c.to_integer()).collect();
        return Ok(ApproxResult {
            vector: target.clone(),
            coeffs,
            achieved_dist: Rational::zero(),
            oracle_calls: 0,
            base_oracle_calls: None,
            exact_dist: None,
            ratio: None,
            trace: None,
        });
    }

    let mut drv = Driver { basis, target, gap, calls: 0 };
    let two = int(2);
    let mut best: Option<Witness> = None;

    // Galloping: an Empty at D certifies d > D/(1+delta), a Found d <= D.
    let empty_at = match drv.ask(Rational::one())? {
        Some(w) => {
            keep_closer(&mut best, w);
            let mut d = Rational::one();
            loop {
                d /= &two;
                match drv.ask(d.clone())? {
                    Some(w) => keep_closer(&mut best, w),
                    None => break d,
                }
            }
        }
        None => {
            let mut d = Rational::one();
            loop {
                let up = &d * &two;
                match drv.ask(up.clone())? {
                    Some(w) => {
                        keep_closer(&mut best, w);
                        break d;
                    }
                    None => d = up,
                }
            }
        }
    };
    let gallop_calls = drv.calls;
    let mut best = best.expect("galloping ends with a witness");
    let mut lower = floor_log1p(&empty_at, &delta) - 1;
    let mut upper = ceil_log1p(&best.dist, &delta);
    lower = lower.min(upper);
    let (initial_lower, initial_upper) = (lower, upper);
    let m0 = upper - lower;
    let cap = u64::from(ceil_log2(m0.max(1) as u64)) + 4;
    let mut steps = Vec::new();
    let base = Rational::one() + &delta;

    while upper - lower >= 3 {
        if steps.len() as u64 >= cap {
            return Err(Error::SearchDefect(format!("no convergence after {cap} steps from M0 = {m0}")));
        }
        let prev = upper - lower;
        let half = (prev + 1) / 2;
        let probe = lower + half;
        let found = match drv.ask(pow(&base, probe))? {
            Some(w) => {
                upper = ceil_log1p(&w.dist, &delta);
                if w.dist < best.dist {
                    best = w;
                }
                true
            }
            None => {
                lower += half - 1;
                false
            }
        };
        lower = lower.min(upper);
        if 2 * (upper - lower) > prev + 2 {
            return Err(Error::SearchDefect(format!(
                "bracket [{lower}, {upper}] did not halve from width {prev}"
            )));
        }
        steps.push(SearchStep { probe, found, lower, upper });
    }

    let final_d = pow(&base, upper + 1);
    let Some(w) = drv.ask(final_d.clone())? else {
        return Err(Error::GapOracleUnsound(format!(
            "Empty at D = (1+delta)^{} although a witness within (1+delta)^{upper} is known",
            upper + 1
        )));
    };
    let answer = if w.dist <= best.dist { w } else { best };
    let search_calls = drv.calls - gallop_calls;
    Ok(ApproxResult {
        vector: answer.vector,
        coeffs: answer.coeffs,
        achieved_dist: answer.dist,
        oracle_calls: drv.calls,
        base_oracle_calls: None,
        exact_dist: None,
        ratio: None,
        trace: Some(SearchTrace {
            delta,
            initial_lower,
            initial_upper,
            gallop_calls,
            steps,
            search_calls,
        }),
    })
}

/// [`approx_cvp`] over a 2-gap oracle boosted to gap `1 + delta`.
pub fn approx_cvp_boosted(
    basis: &RationalMatrix,
    target: &RationalVector,
    eps: &Rational,
    base: Arc<dyn GapOracle>,
) -> Result<ApproxResult> {
    if *eps <= int(0) || *eps >= int(1) {
        return Err(Error::InvalidEps(eps.to_string()));
    }
    let boosted = BoostedGap::new(BoostConfig::new(search_delta(eps), base)?);
    let mut r = approx_cvp(basis, target, eps, &boosted)?;
    r.base_oracle_calls = Some(boosted.base_calls());
    Ok(r)
}

/// Uses `gap` directly when its gap is at most `1 + delta`, boosting it otherwise.
pub fn approx_cvp_with(
    basis: &RationalMatrix,
    target: &RationalVector,
    eps: &Rational,
    gap: Arc<dyn GapOracle>,
) -> Result<ApproxResult> {
    if *eps > int(0) && gap.alpha() <= Rational::one() + search_delta(eps) {
        approx_cvp(basis, target, eps, gap.as_ref())
    } else {
        approx_cvp_boosted(basis, target, eps, gap)
    }
}
