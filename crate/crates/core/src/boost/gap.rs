use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use num_traits::One;
use serde::{Deserialize, Serialize};

use super::BoostConfig;
use crate::covering::gen_box_cover;
use crate::error::{Error, Result};
use crate::geometry::Parallelepiped;
use crate::linalg::{int, Rational};
use crate::oracles::{GapOracle, GapResult, LatticeInstance};

/// Answer of one boosted query and the number of base-oracle calls it made.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoostOutcome {
    pub result: GapResult,
    pub oracle_calls: u64,
}

/// A `(1+eps)`-gap oracle built from a 2-gap oracle.
///
/// Coverings depend only on the dimension once `delta` is fixed, so each is
/// generated once and shared by every later query.
pub struct BoostedGap {
    cfg: BoostConfig,
    covers: Mutex<HashMap<usize, Arc<Vec<Parallelepiped>>>>,
    calls: AtomicU64,
}

impl BoostedGap {
    pub fn new(cfg: BoostConfig) -> Self {
        Self { cfg, covers: Mutex::new(HashMap::new()), calls: AtomicU64::new(0) }
    }

    pub fn config(&self) -> &BoostConfig {
        &self.cfg
    }

    /// Base-oracle calls made so far, over all queries.
    pub fn base_calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    fn cover(&self, dim: usize) -> Result<Arc<Vec<Parallelepiped>>> {
        let mut covers = self.covers.lock().expect("cover cache poisoned");
        if let Some(c) = covers.get(&dim) {
            return Ok(c.clone());
        }
        let bodies: Vec<Parallelepiped> = gen_box_cover(dim, self.cfg.delta())?.map(|(_, p)| p).collect();
        let bodies = Arc::new(bodies);
        covers.insert(dim, bodies.clone());
        Ok(bodies)
    }

    /// Runs the boosted query and reports its own call count.
    pub fn solve(&self, inst: &LatticeInstance) -> Result<BoostOutcome> {
        let d = inst.gap_distance()?;
        let scale = d.recip();
        let basis = inst.basis().scale(&scale);
        let target = inst.target().scale(&scale);
        let cover = self.cover(inst.dim())?;
        let two = int(2);
        let mut calls = 0;
        for body in cover.iter() {
            let center = body.center().add(&target);
            let map = body.map();
            let b = if map.is_diagonal() {
                let diag: Vec<Rational> = (0..map.dim()).map(|i| map.get(i, i).clone()).collect();
                basis.scale_rows(&diag)
            } else {
                map.mul(&basis)?
            };
            let t = map.mul_vec(&center)?;
            // Product of two nonsingular matrices.
            let query = LatticeInstance::new_unchecked(b, t, Some(two.clone()));
            calls += 1;
            self.calls.fetch_add(1, Ordering::Relaxed);
            if let GapResult::Found { vector, coeffs } = self.cfg.oracle().query(&query)? {
                let image = query.lattice_vector(&coeffs)?;
                if image != vector {
                    return Err(Error::OracleUnsound(format!(
                        "witness {vector} is not B x for the returned coefficients"
                    )));
                }
                if vector.sub(query.target()).inf_norm() > two {
                    return Err(Error::OracleUnsound(format!("witness {vector} is farther than 2 from the target")));
                }
                let v = inst.lattice_vector(&coeffs)?;
                if v.sub(inst.target()).inf_norm() > *d {
                    return Err(Error::OracleUnsound(format!("lattice vector {v} leaves t + D H")));
                }
                return Ok(BoostOutcome { result: GapResult::Found { vector: v, coeffs }, oracle_calls: calls });
            }
        }
        Ok(BoostOutcome { result: GapResult::Empty, oracle_calls: calls })
    }
}

impl GapOracle for BoostedGap {
    fn name(&self) -> &str {
        "boosted"
    }

    fn alpha(&self) -> Rational {
        Rational::one() + self.cfg.eps()
    }

    fn query(&self, inst: &LatticeInstance) -> Result<GapResult> {
        self.solve(inst).map(|o| o.result)
    }
}

/// One `(1+eps)`-gap query through a fresh [`BoostedGap`].
pub fn boosted_gap(inst: &LatticeInstance, cfg: &BoostConfig) -> Result<BoostOutcome> {
    BoostedGap::new(cfg.clone()).solve(inst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covering::exponent_bound;
    use crate::linalg::{rat, RationalMatrix, RationalVector};
    use crate::oracles::{adversarial_2gap, exact_as_gap, exact_cvp, ExactGap};

    fn exact_cfg(eps: Rational) -> BoostConfig {
        BoostConfig::new(eps, Arc::new(exact_as_gap(int(2)).unwrap())).unwrap()
    }

    fn square_center(d: Rational) -> LatticeInstance {
        LatticeInstance::new(RationalMatrix::identity(2), RationalVector::new(vec![rat(1, 2), rat(1, 2)]), Some(d))
            .unwrap()
    }

    #[test]
    fn found_at_exact_distance() {
        let out = boosted_gap(&square_center(rat(1, 2)), &exact_cfg(rat(1, 2))).unwrap();
        let GapResult::Found { vector, .. } = out.result else { panic!("expected a witness") };
        assert_eq!(vector.sub(&RationalVector::new(vec![rat(1, 2), rat(1, 2)])).inf_norm(), rat(1, 2));
    }

    #[test]
    fn empty_below_gap() {
        let out = boosted_gap(&square_center(rat(1, 4)), &exact_cfg(rat(1, 2))).unwrap();
        assert_eq!(out.result, GapResult::Empty);
        // delta = 1/3, exponent_bound(1/3, 3) = 0: one box per orthant.
        assert_eq!(out.oracle_calls, 4);
    }

    #[test]
    fn empty_query_uses_whole_cover() {
        let cfg = exact_cfg(rat(1, 10));
        assert_eq!(cfg.delta(), &rat(1, 11));
        let a = exponent_bound(cfg.delta(), 3).unwrap();
        assert_eq!(a, 2);
        let out = boosted_gap(&square_center(rat(1, 10)), &cfg).unwrap();
        assert_eq!(out.result, GapResult::Empty);
        assert_eq!(out.oracle_calls, 4 * u64::from(a + 1).pow(2));
        assert!(out.oracle_calls <= 4 * 25);
    }

    #[test]
    fn adversarial_base_is_sound() {
        let basis = RationalMatrix::from_int_rows(&[&[3, 1], &[-1, 2]]).unwrap();
        let target = RationalVector::new(vec![rat(7, 10), rat(-13, 10)]);
        let exact = exact_cvp(&basis, &target).unwrap().dist;
        for seed in 0..8 {
            let cfg = BoostConfig::new(rat(1, 2), Arc::new(adversarial_2gap(seed))).unwrap();
            for d in [rat(1, 3), rat(1, 2), int(1), int(2)] {
                let inst = LatticeInstance::new(basis.clone(), target.clone(), Some(d.clone())).unwrap();
                match boosted_gap(&inst, &cfg).unwrap().result {
                    GapResult::Found { vector, .. } => assert!(vector.sub(&target).inf_norm() <= d),
                    GapResult::Empty => assert!(&exact * rat(3, 2) > d),
                }
            }
        }
    }

    struct Liar;

    impl GapOracle for Liar {
        fn name(&self) -> &str {
            "liar"
        }
        fn alpha(&self) -> Rational {
            int(2)
        }
        fn query(&self, inst: &LatticeInstance) -> Result<GapResult> {
            let coeffs = vec![1000.into(); inst.dim()];
            Ok(GapResult::Found { vector: inst.lattice_vector(&coeffs)?, coeffs })
        }
    }

    #[test]
    fn unsound_witness_is_rejected() {
        let cfg = BoostConfig::new(rat(1, 2), Arc::new(Liar)).unwrap();
        assert!(matches!(boosted_gap(&square_center(int(1)), &cfg), Err(Error::OracleUnsound(_))));
    }

    #[test]
    fn cover_cache_and_counter() {
        let g = BoostedGap::new(BoostConfig::new(rat(1, 2), Arc::new(ExactGap::new(int(2)).unwrap())).unwrap());
        g.solve(&square_center(rat(1, 4))).unwrap();
        g.solve(&square_center(rat(1, 4))).unwrap();
        assert_eq!(g.base_calls(), 8);
        assert_eq!(g.covers.lock().unwrap().len(), 1);
        assert_eq!(g.alpha(), rat(3, 2));
    }
}
