//! Gap boosting and the approximate CVP driver.
//!
//! [`BoostedGap`] turns a 2-gap oracle into a `(1+eps)`-gap oracle by querying
//! it once per body of the parallelepiped covering of `t + H_delta`.
//! [`approx_cvp`] runs the bracketing binary search over powers of `1+delta`
//! on top of any sufficiently tight gap oracle.

mod gap;
mod search;

use std::fmt;
use std::sync::Arc;

use num_traits::One;

use crate::error::{Error, Result};
use crate::linalg::{int, Rational};
use crate::oracles::GapOracle;

pub use gap::{boosted_gap, BoostOutcome, BoostedGap};
pub use search::{
    approx_cvp, approx_cvp_boosted, approx_cvp_with, ceil_log1p, floor_log1p, search_delta, ApproxResult, SearchStep,
    SearchTrace,
};

/// Target gap `1 + eps` and the covering parameter `delta = eps / (1 + eps)`,
/// together with the 2-gap oracle being boosted.
#[derive(Clone)]
pub struct BoostConfig {
    eps: Rational,
    delta: Rational,
    oracle: Arc<dyn GapOracle>,
}

impl BoostConfig {
    pub fn new(eps: Rational, oracle: Arc<dyn GapOracle>) -> Result<Self> {
        if eps <= int(0) || eps > int(1) {
            return Err(Error::InvalidEps(eps.to_string()));
        }
        if oracle.alpha() > int(2) {
            return Err(Error::Config(format!(
                "boosting needs a 2-gap oracle, `{}` only guarantees gap {}",
                oracle.name(),
                oracle.alpha()
            )));
        }
        let delta = &eps / (&eps + Rational::one());
        Ok(Self { eps, delta, oracle })
    }

    pub fn eps(&self) -> &Rational {
        &self.eps
    }

    /// `eps / (1 + eps)`, so that `1 - delta = 1 / (1 + eps)`.
    pub fn delta(&self) -> &Rational {
        &self.delta
    }

    pub fn oracle(&self) -> &Arc<dyn GapOracle> {
        &self.oracle
    }
}

impl fmt::Debug for BoostConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoostConfig")
            .field("eps", &self.eps)
            .field("delta", &self.delta)
            .field("oracle", &self.oracle.name())
            .finish()
    }
}
