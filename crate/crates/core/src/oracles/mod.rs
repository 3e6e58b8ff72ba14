//! Lattice instances, the gap-oracle interface and its built-in strategies.
//!
//! An `alpha`-gap oracle, given `(A, t, D)`, either returns a lattice vector
//! within distance `D` of `t` or asserts that every lattice vector is farther
//! than `D / alpha`. Oracles are registered by name in [`oracle_registry`].

mod adversarial;
mod enumerate;
mod transform;

use std::sync::Arc;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    int, serde_bigints, serde_rational, serde_rational_opt, Rational, RationalMatrix,
    RationalVector,
};
use crate::registry::Registry;

pub use adversarial::{adversarial_2gap, Adversarial2Gap};
pub use enumerate::{exact_cvp, CvpSolution, Enumerator, SearchOrder, DEFAULT_DIMENSION_LIMIT};
pub use transform::{box_ip_to_cvp, transform_instance, Slab};

/// Full-rank lattice `Lambda(A) = {A x : x in Z^n}` (basis vectors are the
/// columns of `A`), a target, and an optional distance parameter.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawInstance")]
pub struct LatticeInstance {
    basis: RationalMatrix,
    target: RationalVector,
    #[serde(with = "serde_rational_opt", skip_serializing_if = "Option::is_none", default)]
    dist: Option<Rational>,
}

#[derive(Deserialize)]
struct RawInstance {
    basis: RationalMatrix,
    target: RationalVector,
    #[serde(with = "serde_rational_opt", default)]
    dist: Option<Rational>,
}

impl TryFrom<RawInstance> for LatticeInstance {
    type Error = Error;

    fn try_from(raw: RawInstance) -> Result<Self> {
        LatticeInstance::new(raw.basis, raw.target, raw.dist)
    }
}

impl LatticeInstance {
    pub fn new(basis: RationalMatrix, target: RationalVector, dist: Option<Rational>) -> Result<Self> {
        target.check_dim(basis.dim())?;
        if basis.is_singular() {
            return Err(Error::SingularBasis);
        }
        if let Some(d) = &dist {
            if *d <= int(0) {
                return Err(Error::Config(format!("gap distance must be positive, got {d}")));
            }
        }
        Ok(Self { basis, target, dist })
    }

    /// For callers that already know `basis` is nonsingular and `dist` positive.
    pub(crate) fn new_unchecked(basis: RationalMatrix, target: RationalVector, dist: Option<Rational>) -> Self {
        debug_assert_eq!(basis.dim(), target.dim());
        Self { basis, target, dist }
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn basis(&self) -> &RationalMatrix {
        &self.basis
    }

    pub fn target(&self) -> &RationalVector {
        &self.target
    }

    pub fn dist(&self) -> Option<&Rational> {
        self.dist.as_ref()
    }

    pub fn gap_distance(&self) -> Result<&Rational> {
        self.dist.as_ref().ok_or(Error::MissingDistance)
    }

    pub fn with_dist(&self, dist: Rational) -> Result<Self> {
        Self::new(self.basis.clone(), self.target.clone(), Some(dist))
    }

    /// `A x` for integer coefficients `x`.
    pub fn lattice_vector(&self, coeffs: &[BigInt]) -> Result<RationalVector> {
        self.basis.mul_vec(&RationalVector::from_bigints(coeffs))
    }
}

/// Answer of a gap oracle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "answer", rename_all = "lowercase")]
pub enum GapResult {
    Found {
        vector: RationalVector,
        #[serde(with = "serde_bigints")]
        coeffs: Vec<BigInt>,
    },
    Empty,
}

impl GapResult {
    pub fn is_found(&self) -> bool {
        matches!(self, GapResult::Found { .. })
    }
}

/// Serializable record of a CVP solution.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub vector: RationalVector,
    #[serde(with = "serde_bigints")]
    pub coeffs: Vec<BigInt>,
    #[serde(with = "serde_rational")]
    pub dist: Rational,
}

impl From<CvpSolution> for SolutionRecord {
    fn from(s: CvpSolution) -> Self {
        Self { vector: s.vector, coeffs: s.coeffs, dist: s.dist }
    }
}

/// A sound `alpha`-gap oracle for CVP in the max norm.
pub trait GapOracle: Send + Sync {
    fn name(&self) -> &str;

    /// The gap factor `alpha >= 1` this oracle is sound for.
    fn alpha(&self) -> Rational;

    /// Answers the gap question for `inst`, whose distance must be set.
    fn query(&self, inst: &LatticeInstance) -> Result<GapResult>;
}

/// Exact enumeration used as a gap oracle; sound for every `alpha >= 1`.
#[derive(Clone, Debug)]
pub struct ExactGap {
    alpha: Rational,
}

impl ExactGap {
    pub fn new(alpha: Rational) -> Result<Self> {
        if alpha < int(1) {
            return Err(Error::Config(format!("gap factor must be at least 1, got {alpha}")));
        }
        Ok(Self { alpha })
    }
}

/// Gap oracle answering with the exact closest vector whenever it is within `D`.
pub fn exact_as_gap(alpha: Rational) -> Result<ExactGap> {
    ExactGap::new(alpha)
}

impl GapOracle for ExactGap {
    fn name(&self) -> &str {
        "exact"
    }

    fn alpha(&self) -> Rational {
        self.alpha.clone()
    }

    fn query(&self, inst: &LatticeInstance) -> Result<GapResult> {
        let d = inst.gap_distance()?;
        Ok(match Enumerator::new(inst.basis(), inst.target())?.closest(Some(d)) {
            Some(s) => GapResult::Found { vector: s.vector, coeffs: s.coeffs },
            None => GapResult::Empty,
        })
    }
}

/// Parameters available to oracle factories.
#[derive(Clone, Debug)]
pub struct OracleParams {
    pub alpha: Rational,
    pub seed: u64,
}

impl Default for OracleParams {
    fn default() -> Self {
        Self { alpha: int(2), seed: 0 }
    }
}

pub type OracleFactory = Box<dyn Fn(&OracleParams) -> Result<Arc<dyn GapOracle>> + Send + Sync>;

pub type OracleRegistry = Registry<OracleFactory>;

/// Registry with the `exact` and `adversarial` gap oracles.
pub fn oracle_registry() -> OracleRegistry {
    let mut r: OracleRegistry = Registry::new("gap oracle");
    r.register(
        "exact",
        Box::new(|p: &OracleParams| Ok(Arc::new(ExactGap::new(p.alpha.clone())?) as Arc<dyn GapOracle>)),
    );
    r.register(
        "adversarial",
        Box::new(|p: &OracleParams| Ok(Arc::new(adversarial_2gap(p.seed)) as Arc<dyn GapOracle>)),
    );
    r
}
