//! Seeded instance generation, verification campaigns and their reports.

pub mod budget;
mod campaign;
mod instances;

pub use campaign::{
    audit_approx, audit_counts, audit_gap, build_oracle, replay, run_campaign, verify_cover, Campaign,
    CampaignKind, CampaignParams, CaseOutcome, CaseReport, Counterexample, CoverTable, Report,
    DEFAULT_MAX_DIM, HARD_MAX_DIM, LARGE_MAX_DIM,
};
pub use instances::{
    case_rng, gap_distance, gen_instances, random_basis, random_instance, random_orthant_ellipsoid,
    random_point_in_cube, random_rational, random_slab, random_target, seeded_rng, InstanceGen,
    MAX_TARGET_DENOMINATOR,
};
