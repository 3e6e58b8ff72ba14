use sha2::{Digest, Sha256};

use super::{Enumerator, GapOracle, GapResult, LatticeInstance, SearchOrder};
use crate::error::Result;
use crate::linalg::{int, Rational};

/// A sound but unhelpful 2-gap oracle.
///
/// It must answer `Found` when the closest vector is within `D/2` and `Empty`
/// when it is farther than `D`; in between a seeded coin decides. A `Found`
/// witness is the lexicographically first or last vector within `D` rather
/// than the closest one. Answers depend only on the seed and the instance.
#[derive(Clone, Debug)]
pub struct Adversarial2Gap {
    seed: u64,
}

pub fn adversarial_2gap(seed: u64) -> Adversarial2Gap {
    Adversarial2Gap { seed }
}

impl Adversarial2Gap {
    fn coin(&self, inst: &LatticeInstance) -> [bool; 2] {
        let mut h = Sha256::new();
        h.update(self.seed.to_le_bytes());
        h.update(serde_json::to_vec(inst).expect("instances serialize"));
        let digest = h.finalize();
        [digest[0] & 1 == 1, digest[1] & 1 == 1]
    }
}

impl GapOracle for Adversarial2Gap {
    fn name(&self) -> &str {
        "adversarial"
    }

    fn alpha(&self) -> Rational {
        int(2)
    }

    fn query(&self, inst: &LatticeInstance) -> Result<GapResult> {
        let d = inst.gap_distance()?;
        let e = Enumerator::new(inst.basis(), inst.target())?;
        let Some(closest) = e.closest(Some(d)) else {
            return Ok(GapResult::Empty);
        };
        let [refuse, descending] = self.coin(inst);
        if &closest.dist * int(2) > *d && refuse {
            return Ok(GapResult::Empty);
        }
        let order = if descending { SearchOrder::Descending } else { SearchOrder::Ascending };
        let w = e.first_within(d, order).unwrap_or(closest);
        Ok(GapResult::Found { vector: w.vector, coeffs: w.coeffs })
    }
}
