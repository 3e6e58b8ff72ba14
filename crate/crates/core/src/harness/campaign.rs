use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_traits::One;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::budget::{boost_call_bound, cover_count_bound, ellipsoid_grid_bound, parallelepiped_grid_bound};
use super::instances::{case_rng, gap_distance, random_instance, random_orthant_ellipsoid, random_point_in_cube};
use crate::boost::{approx_cvp_with, BoostConfig, BoostedGap};
use crate::covering::{
    count_grid_in_body, exponent_bound, grid_points, scheme_registry, CoverBody, CoverIndex, CoverScheme,
    GridSpec,
};
use crate::error::{Error, Result};
use crate::geometry::AxisBox;
use crate::linalg::{int, serde_rational, Rational, RationalVector};
use crate::oracles::{exact_cvp, oracle_registry, GapOracle, GapResult, LatticeInstance, OracleParams};

/// Default and extended dimension caps for campaigns, and the absolute limit.
pub const DEFAULT_MAX_DIM: usize = 3;
pub const LARGE_MAX_DIM: usize = 5;
pub const HARD_MAX_DIM: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CampaignKind {
    CoverVerify,
    CountAudit,
    ApproxAudit,
    GapBudget,
}

impl CampaignKind {
    pub fn parse(s: &str) -> Result<Self> {
        serde_json::from_value(Value::String(s.to_string()))
            .map_err(|_| Error::UnknownStrategy { kind: "campaign", name: s.to_string() })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CampaignKind::CoverVerify => "cover-verify",
            CampaignKind::CountAudit => "count-audit",
            CampaignKind::ApproxAudit => "approx-audit",
            CampaignKind::GapBudget => "gap-budget",
        }
    }
}

impl fmt::Display for CampaignKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CampaignParams {
    pub dims: Vec<usize>,
    #[serde(with = "rational_list")]
    pub eps: Vec<Rational>,
    /// Sample points per configuration (cover-verify), random ellipsoids per
    /// configuration (count-audit), or instances (approx-audit, gap-budget).
    pub samples: u64,
    pub seed: u64,
    /// Covering scheme for cover-verify.
    pub scheme: String,
    /// Gap oracle for approx-audit and gap-budget.
    pub oracle: String,
    /// Gap the oracle is built for.
    #[serde(with = "serde_rational")]
    pub alpha: Rational,
    pub entry_bound: i64,
    /// Raises the dimension cap from 3 to 5.
    pub large: bool,
}

impl Default for CampaignParams {
    fn default() -> Self {
        Self {
            dims: vec![1, 2, 3],
            eps: vec![Rational::new(1.into(), 2.into()), Rational::new(1.into(), 10.into())],
            samples: 100,
            seed: 0,
            scheme: "box".into(),
            oracle: "exact".into(),
            alpha: int(2),
            entry_bound: 5,
            large: false,
        }
    }
}

mod rational_list {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(xs: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(xs.iter().map(|x| x.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rational>, D::Error> {
        let v = RationalVector::deserialize(d)?;
        Ok(v.into_entries())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Campaign {
    pub kind: CampaignKind,
    pub params: CampaignParams,
}

/// Serialized failing case with everything needed to rerun it in isolation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Counterexample {
    UnsafeBody {
        scheme: String,
        dim: usize,
        #[serde(with = "serde_rational")]
        eps: Rational,
        index: CoverIndex,
        body: CoverBody,
    },
    UncoveredPoint {
        scheme: String,
        dim: usize,
        #[serde(with = "serde_rational")]
        eps: Rational,
        point: RationalVector,
    },
    CountBound {
        dim: usize,
        #[serde(with = "serde_rational")]
        eps: Rational,
    },
    GridCount {
        dim: usize,
        #[serde(with = "serde_rational")]
        eps: Rational,
        body: CoverBody,
        bound: u64,
    },
    Approx {
        instance: LatticeInstance,
        #[serde(with = "serde_rational")]
        eps: Rational,
        oracle: String,
        seed: u64,
        #[serde(with = "serde_rational")]
        alpha: Rational,
    },
    Gap {
        instance: LatticeInstance,
        #[serde(with = "serde_rational")]
        eps: Rational,
        oracle: String,
        seed: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseReport {
    pub index: usize,
    pub dim: usize,
    #[serde(with = "serde_rational")]
    pub eps: Rational,
    pub passed: bool,
    pub details: Value,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub counterexample: Option<Counterexample>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub kind: CampaignKind,
    pub params: CampaignParams,
    pub passed: bool,
    pub cases: usize,
    pub failures: usize,
    pub results: Vec<CaseReport>,
}

/// Outcome of one check: details for the report, and a counterexample on failure.
#[derive(Clone, Debug, PartialEq)]
pub struct CaseOutcome {
    pub details: Value,
    pub counterexample: Option<Counterexample>,
}

impl CaseOutcome {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

fn check_params(kind: CampaignKind, p: &CampaignParams) -> Result<()> {
    let cap = if p.large { LARGE_MAX_DIM } else { DEFAULT_MAX_DIM };
    if p.dims.is_empty() || p.eps.is_empty() {
        return Err(Error::Config("campaigns need at least one dimension and one eps".into()));
    }
    for &n in &p.dims {
        if n == 0 || n > HARD_MAX_DIM {
            return Err(Error::Config(format!("dimension {n} outside 1..={HARD_MAX_DIM}")));
        }
        if n > cap {
            return Err(Error::Config(format!(
                "dimension {n} exceeds the campaign cap {cap}{}",
                if p.large { "" } else { " (pass the large flag for up to 5)" }
            )));
        }
        if kind == CampaignKind::CoverVerify && p.scheme == "ellipsoid" && n < 2 {
            return Err(Error::DimensionTooSmall(n));
        }
    }
    for e in &p.eps {
        if *e <= int(0) || *e >= int(1) {
            return Err(Error::InvalidEps(e.to_string()));
        }
    }
    if p.samples == 0 {
        return Err(Error::Config("sample count must be positive".into()));
    }
    if p.entry_bound < 1 {
        return Err(Error::Config(format!("entry bound must be at least 1, got {}", p.entry_bound)));
    }
    scheme_registry().get(&p.scheme)?;
    oracle_registry().get(&p.oracle)?;
    Ok(())
}

struct CaseSpec {
    dim: usize,
    eps: Rational,
}

fn case_specs(kind: CampaignKind, p: &CampaignParams) -> Vec<CaseSpec> {
    match kind {
        CampaignKind::CoverVerify | CampaignKind::CountAudit => p
            .dims
            .iter()
            .flat_map(|&dim| p.eps.iter().map(move |e| CaseSpec { dim, eps: e.clone() }))
            .collect(),
        CampaignKind::ApproxAudit | CampaignKind::GapBudget => (0..p.samples as usize)
            .map(|i| CaseSpec {
                dim: p.dims[i % p.dims.len()],
                eps: p.eps[(i / p.dims.len()) % p.eps.len()].clone(),
            })
            .collect(),
    }
}

/// Runs every case of `c` in parallel and collects the results by index.
pub fn run_campaign(c: &Campaign) -> Result<Report> {
    let p = &c.params;
    check_params(c.kind, p)?;
    let specs = case_specs(c.kind, p);
    let results: Vec<CaseReport> = specs
        .par_iter()
        .enumerate()
        .map(|(index, spec)| {
            let outcome = run_case(c.kind, p, index, spec)?;
            Ok(CaseReport {
                index,
                dim: spec.dim,
                eps: spec.eps.clone(),
                passed: outcome.passed(),
                details: outcome.details,
                counterexample: outcome.counterexample,
            })
        })
        .collect::<Result<_>>()?;
    let failures = results.iter().filter(|r| !r.passed).count();
    Ok(Report {
        kind: c.kind,
        params: p.clone(),
        passed: failures == 0,
        cases: results.len(),
        failures,
        results,
    })
}

fn run_case(kind: CampaignKind, p: &CampaignParams, index: usize, spec: &CaseSpec) -> Result<CaseOutcome> {
    let mut rng = case_rng(p.seed, index as u64);
    match kind {
        CampaignKind::CoverVerify => verify_cover(&p.scheme, spec.dim, &spec.eps, p.samples, &mut rng),
        CampaignKind::CountAudit => audit_counts(spec.dim, &spec.eps, p.samples, &mut rng),
        CampaignKind::ApproxAudit => {
            let inst = random_instance(&mut rng, spec.dim, p.entry_bound);
            audit_approx(&inst, &spec.eps, &p.oracle, p.seed, &p.alpha)
        }
        CampaignKind::GapBudget => {
            let inst = random_instance(&mut rng, spec.dim, p.entry_bound);
            let exact = exact_cvp(inst.basis(), inst.target())?.dist;
            let inst = inst.with_dist(gap_distance(&mut rng, &exact, &spec.eps))?;
            audit_gap(&inst, &spec.eps, &p.oracle, p.seed)
        }
    }
}

/// A covering materialized for point queries.
pub struct CoverTable {
    scheme: &'static str,
    dim: usize,
    eps: Rational,
    bodies: Vec<(CoverIndex, CoverBody)>,
    position: HashMap<CoverIndex, usize>,
}

impl CoverTable {
    pub fn new(scheme: &dyn CoverScheme, dim: usize, eps: &Rational) -> Result<Self> {
        let bodies: Vec<_> = scheme.bodies(dim, eps)?.collect();
        let position = bodies.iter().enumerate().map(|(i, (idx, _))| (idx.clone(), i)).collect();
        Ok(Self { scheme: scheme.name(), dim, eps: eps.clone(), bodies, position })
    }

    pub fn bodies(&self) -> &[(CoverIndex, CoverBody)] {
        &self.bodies
    }

    /// A body containing `x`: the scheme's own guess first, then a full scan.
    pub fn find(&self, x: &RationalVector) -> Result<Option<&CoverIndex>> {
        let registry = scheme_registry();
        let scheme = registry.get(self.scheme)?;
        if let Some(i) = scheme.locate(self.dim, &self.eps, x).and_then(|idx| self.position.get(&idx)) {
            if self.bodies[*i].1.contains(x)? {
                return Ok(Some(&self.bodies[*i].0));
            }
        }
        for (idx, body) in &self.bodies {
            if body.contains(x)? {
                return Ok(Some(idx));
            }
        }
        Ok(None)
    }
}

/// Safety of every body, then coverage of all corners of `H_eps` and
/// `samples` random points of it.
pub fn verify_cover<R: Rng>(
    scheme_name: &str,
    dim: usize,
    eps: &Rational,
    samples: u64,
    rng: &mut R,
) -> Result<CaseOutcome> {
    let registry = scheme_registry();
    let scheme = registry.get(scheme_name)?;
    let table = CoverTable::new(scheme.as_ref(), dim, eps)?;
    let scheme = scheme.name().to_string();
    for (index, body) in table.bodies() {
        if !body.is_safe() {
            return Ok(CaseOutcome {
                details: json!({ "bodies": table.bodies().len(), "unsafe": true }),
                counterexample: Some(Counterexample::UnsafeBody {
                    scheme,
                    dim,
                    eps: eps.clone(),
                    index: index.clone(),
                    body: body.clone(),
                }),
            });
        }
    }
    let hi = Rational::one() - eps;
    let lo = -&hi;
    let corners = AxisBox::cube(dim, lo.clone(), hi.clone())?;
    let points = corners
        .corners()
        .collect::<Vec<_>>()
        .into_iter()
        .chain((0..samples).map(|_| random_point_in_cube(rng, dim, &lo, &hi, 1 << 20)));
    let mut checked = 0u64;
    for x in points {
        if table.find(&x)?.is_none() {
            return Ok(CaseOutcome {
                details: json!({ "bodies": table.bodies().len(), "points_checked": checked }),
                counterexample: Some(Counterexample::UncoveredPoint { scheme, dim, eps: eps.clone(), point: x }),
            });
        }
        checked += 1;
    }
    Ok(CaseOutcome {
        details: json!({ "bodies": table.bodies().len(), "points_checked": checked }),
        counterexample: None,
    })
}

/// Emitted parallelepiped count against `2^n (A+1)^n` and the size bound,
/// `|G_eps|`, the `2^n` grid bound over every emitted body, and the ellipsoid
/// grid bound over `ellipsoids` random orthant ellipsoids.
pub fn audit_counts<R: Rng>(dim: usize, eps: &Rational, ellipsoids: u64, rng: &mut R) -> Result<CaseOutcome> {
    let registry = scheme_registry();
    let scheme = registry.get("box")?;
    let spec = scheme.spec(dim, eps)?;
    let a = exponent_bound(eps, 3)?;
    let bound = cover_count_bound(dim, eps)?;
    let grid = GridSpec::new(dim, eps)?;
    let grid_points = grid_points(&grid).count() as u64;
    let mut emitted = 0u64;
    let mut pp_max = 0u64;
    let pp_bound = parallelepiped_grid_bound(dim)?;
    let mut first_bad: Option<Counterexample> = None;
    for (index, body) in scheme.bodies(dim, eps)? {
        emitted += 1;
        let moved = body.to_positive_orthant(&index)?;
        let count = count_grid_in_body(&moved, &grid)?;
        pp_max = pp_max.max(count);
        if count > pp_bound && first_bad.is_none() {
            first_bad = Some(Counterexample::GridCount { dim, eps: eps.clone(), body: moved, bound: pp_bound });
        }
    }
    let expected = 2u64.pow(dim as u32) * u64::from(a + 1).pow(dim as u32);
    let counts_ok = emitted == expected && spec.total_count == expected && emitted <= bound;
    let grid_ok = grid_points == grid.size() && grid.size() == u64::from(grid.levels).pow(dim as u32);
    let ell_bound = ellipsoid_grid_bound(dim, eps)?;
    let mut ell_max = 0u64;
    for _ in 0..ellipsoids {
        let e = CoverBody::Ellipsoid(random_orthant_ellipsoid(rng, dim));
        let count = count_grid_in_body(&e, &grid)?;
        ell_max = ell_max.max(count);
        if count > ell_bound && first_bad.is_none() {
            first_bad = Some(Counterexample::GridCount { dim, eps: eps.clone(), body: e, bound: ell_bound });
        }
    }
    let counterexample = if !(counts_ok && grid_ok) {
        Some(Counterexample::CountBound { dim, eps: eps.clone() })
    } else {
        first_bad
    };
    Ok(CaseOutcome {
        details: json!({
            "emitted": emitted,
            "expected": expected,
            "size_bound": bound,
            "grid_size": grid_points,
            "parallelepiped_grid_max": pp_max,
            "parallelepiped_grid_bound": pp_bound,
            "ellipsoids": ellipsoids,
            "ellipsoid_grid_max": ell_max,
            "ellipsoid_grid_bound": ell_bound,
        }),
        counterexample,
    })
}

pub fn build_oracle(name: &str, seed: u64, alpha: &Rational) -> Result<Arc<dyn GapOracle>> {
    oracle_registry().get(name)?(&OracleParams { alpha: alpha.clone(), seed })
}

/// Approximation ratio, search call budget and per-step halving for one instance.
pub fn audit_approx(
    inst: &LatticeInstance,
    eps: &Rational,
    oracle: &str,
    seed: u64,
    alpha: &Rational,
) -> Result<CaseOutcome> {
    let gap = build_oracle(oracle, seed, alpha)?;
    let run = approx_cvp_with(inst.basis(), inst.target(), eps, gap)
        .and_then(|r| r.audit(inst.basis(), inst.target()));
    let cx = || Counterexample::Approx {
        instance: inst.clone(),
        eps: eps.clone(),
        oracle: oracle.to_string(),
        seed,
        alpha: alpha.clone(),
    };
    let r = match run {
        Ok(r) => r,
        Err(e @ (Error::GapOracleUnsound(_) | Error::OracleUnsound(_) | Error::SearchDefect(_))) => {
            return Ok(CaseOutcome { details: json!({ "error": e.to_string() }), counterexample: Some(cx()) });
        }
        Err(e) => return Err(e),
    };
    let exact = r.exact_dist.clone().expect("audited");
    let ratio_ok = r.achieved_dist <= (Rational::one() + eps) * &exact;
    let (m0, steps, search_calls, call_bound, halving) = match &r.trace {
        Some(t) => (t.initial_gap(), t.steps.len(), t.search_calls, t.search_call_bound(), t.halves_each_step()),
        None => (0, 0, 0, 0, true),
    };
    let ok = ratio_ok && search_calls <= call_bound && halving;
    Ok(CaseOutcome {
        details: json!({
            "achieved_dist": r.achieved_dist.to_string(),
            "exact_dist": exact.to_string(),
            "ratio": r.ratio.clone().map(|x| x.to_string()),
            "oracle_calls": r.oracle_calls,
            "base_oracle_calls": r.base_oracle_calls,
            "m0": m0,
            "steps": steps,
            "search_calls": search_calls,
            "search_call_bound": call_bound,
            "halving": halving,
        }),
        counterexample: (!ok).then(cx),
    })
}

/// Soundness and call budget of one boosted gap query.
pub fn audit_gap(inst: &LatticeInstance, eps: &Rational, oracle: &str, seed: u64) -> Result<CaseOutcome> {
    let d = inst.gap_distance()?.clone();
    let cfg = BoostConfig::new(eps.clone(), build_oracle(oracle, seed, &int(2))?)?;
    let cover_size = 2u64.pow(inst.dim() as u32) * u64::from(exponent_bound(cfg.delta(), 3)? + 1).pow(inst.dim() as u32);
    let budget = boost_call_bound(inst.dim(), eps)?;
    let exact = exact_cvp(inst.basis(), inst.target())?.dist;
    let cx = || Counterexample::Gap { instance: inst.clone(), eps: eps.clone(), oracle: oracle.to_string(), seed };
    let out = match BoostedGap::new(cfg).solve(inst) {
        Ok(o) => o,
        Err(e @ Error::OracleUnsound(_)) => {
            return Ok(CaseOutcome { details: json!({ "error": e.to_string() }), counterexample: Some(cx()) });
        }
        Err(e) => return Err(e),
    };
    let (answer, sound) = match &out.result {
        GapResult::Found { vector, coeffs } => (
            "found",
            inst.lattice_vector(coeffs)? == *vector && vector.sub(inst.target()).inf_norm() <= d,
        ),
        GapResult::Empty => ("empty", &exact * (Rational::one() + eps) > d && out.oracle_calls == cover_size),
    };
    let ok = sound && out.oracle_calls <= cover_size && cover_size <= budget;
    Ok(CaseOutcome {
        details: json!({
            "answer": answer,
            "dist": d.to_string(),
            "exact_dist": exact.to_string(),
            "oracle_calls": out.oracle_calls,
            "cover_size": cover_size,
            "call_bound": budget,
        }),
        counterexample: (!ok).then(cx),
    })
}

/// Reruns a serialized failing case; `true` when it still fails.
pub fn replay(cx: &Counterexample) -> Result<bool> {
    Ok(match cx {
        Counterexample::UnsafeBody { body, .. } => !body.is_safe(),
        Counterexample::UncoveredPoint { scheme, dim, eps, point } => {
            let registry = scheme_registry();
            let table = CoverTable::new(registry.get(scheme)?.as_ref(), *dim, eps)?;
            let inside = point.inf_norm() <= Rational::one() - eps;
            inside && table.find(point)?.is_none()
        }
        Counterexample::CountBound { dim, eps } => {
            let mut rng = case_rng(0, 0);
            matches!(audit_counts(*dim, eps, 0, &mut rng)?.counterexample, Some(Counterexample::CountBound { .. }))
        }
        Counterexample::GridCount { dim, eps, body, bound } => {
            count_grid_in_body(body, &GridSpec::new(*dim, eps)?)? > *bound
        }
        Counterexample::Approx { instance, eps, oracle, seed, alpha } => {
            !audit_approx(instance, eps, oracle, *seed, alpha)?.passed()
        }
        Counterexample::Gap { instance, eps, oracle, seed } => !audit_gap(instance, eps, oracle, *seed)?.passed(),
    })
}
