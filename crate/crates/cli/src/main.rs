use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use cubecover::boost::{approx_cvp_with, BoostConfig, BoostedGap};
use cubecover::covering::scheme_registry;
use cubecover::harness::{
    audit_counts, build_oracle, case_rng, replay, run_campaign, verify_cover, Campaign, CampaignKind,
    CampaignParams, Counterexample,
};
use cubecover::linalg::{int, parse_rational};
use cubecover::oracles::{exact_cvp, LatticeInstance, Slab, SolutionRecord};
use cubecover::{Error, Rational};

#[derive(Parser)]
#[command(name = "cubecover", version, about = "Cube coverings and gap boosting for max-norm CVP")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Also write the JSON result to this file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print JSON instead of a summary.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Generate, verify and count coverings of H_eps.
    #[command(subcommand)]
    Cover(CoverCmd),
    /// Closest vector queries.
    #[command(subcommand)]
    Cvp(CvpCmd),
    /// Gap questions.
    #[command(subcommand)]
    Gap(GapCmd),
    /// Integer feasibility of slab systems.
    #[command(subcommand)]
    Ip(IpCmd),
    /// Seeded verification campaigns.
    #[command(subcommand)]
    Campaign(CampaignCmd),
}

#[derive(Args)]
struct CoverArgs {
    #[arg(long)]
    dim: usize,
    #[arg(long, value_parser = rational)]
    eps: Rational,
    #[arg(long, default_value = "box")]
    scheme: String,
}

#[derive(Subcommand)]
enum CoverCmd {
    /// Emit every body of the covering.
    Gen(CoverArgs),
    /// Check body safety and coverage of random points and all corners.
    Verify {
        #[command(flatten)]
        cover: CoverArgs,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
    },
    /// Emitted count, size bound, grid size and grid-counting bounds.
    Count {
        #[arg(long)]
        dim: usize,
        #[arg(long, value_parser = rational)]
        eps: Rational,
        /// Random orthant ellipsoids for the ellipsoid grid bound.
        #[arg(long, default_value_t = 20)]
        ellipsoids: u64,
    },
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, default_value = "exact")]
    oracle: String,
    /// Gap the base oracle is built for.
    #[arg(long, value_parser = rational, default_value = "2")]
    oracle_alpha: Rational,
}

#[derive(Subcommand)]
enum CvpCmd {
    /// Exact closest vector by enumeration.
    Exact {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// (1+eps)-approximate closest vector through a gap oracle.
    Approx {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_parser = rational)]
        eps: Rational,
        #[command(flatten)]
        oracle: OracleArgs,
        /// Compare against the exact distance.
        #[arg(long)]
        audit: bool,
    },
}

#[derive(Subcommand)]
enum GapCmd {
    /// Answer the alpha-gap question for an instance with `dist` set.
    Solve {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_parser = rational, default_value = "2")]
        alpha: Rational,
        #[arg(long, default_value = "exact")]
        oracle: String,
    },
}

#[derive(Subcommand)]
enum IpCmd {
    /// Reduce `l <= A x <= u` to a CVP instance with distance 1/2.
    Reduce {
        #[arg(long = "in")]
        input: PathBuf,
        /// Also decide feasibility with the exact solver.
        #[arg(long)]
        solve: bool,
    },
}

#[derive(Subcommand)]
enum CampaignCmd {
    Run {
        #[arg(long, value_parser = kind)]
        kind: CampaignKind,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        dims: Vec<usize>,
        #[arg(long, value_delimiter = ',', value_parser = rational, default_value = "1/2,1/10")]
        eps: Vec<Rational>,
        #[arg(long, default_value_t = 100)]
        samples: u64,
        #[arg(long, default_value = "box")]
        scheme: String,
        #[command(flatten)]
        oracle: OracleArgs,
        #[arg(long, default_value_t = 5)]
        entry_bound: i64,
        /// Allow dimensions up to 5.
        #[arg(long)]
        large: bool,
    },
    /// Rerun a serialized counterexample; exits 1 if it still fails.
    Replay {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

fn rational(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn kind(s: &str) -> Result<CampaignKind, String> {
    CampaignKind::parse(s).map_err(|e| e.to_string())
}

/// What a command produced: JSON, a one-line summary, and whether it passed.
struct Outcome {
    value: Value,
    summary: String,
    passed: bool,
}

impl Outcome {
    fn ok(value: Value, summary: String) -> Self {
        Self { value, summary, passed: true }
    }
}

enum Failure {
    Usage(anyhow::Error),
    Verification(anyhow::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::OracleUnsound(_) | Error::GapOracleUnsound(_) | Error::SearchDefect(_) => {
                Failure::Verification(e.into())
            }
            e => Failure::Usage(e.into()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("results serialize")
}

fn cover(cmd: CoverCmd, common: &Common) -> Result<Outcome, Failure> {
    match cmd {
        CoverCmd::Gen(a) => {
            let registry = scheme_registry();
            let scheme = registry.get(&a.scheme)?;
            let spec = scheme.spec(a.dim, &a.eps)?;
            let bodies: Vec<Value> = scheme
                .bodies(a.dim, &a.eps)?
                .map(|(index, body)| json!({ "index": index, "body": body }))
                .collect();
            let summary = format!("{} bodies ({} covering, n = {}, eps = {})", bodies.len(), a.scheme, a.dim, a.eps);
            Ok(Outcome::ok(json!({ "spec": spec, "bodies": bodies }), summary))
        }
        CoverCmd::Verify { cover: a, samples } => {
            let mut rng = case_rng(common.seed, 0);
            let out = verify_cover(&a.scheme, a.dim, &a.eps, samples, &mut rng)?;
            let passed = out.passed();
            let summary = match &out.counterexample {
                None => format!("pass: {}", out.details),
                Some(cx) => format!("FAIL: {}", to_value(cx)),
            };
            let value = json!({ "passed": passed, "details": out.details, "counterexample": out.counterexample });
            Ok(Outcome { value, summary, passed })
        }
        CoverCmd::Count { dim, eps, ellipsoids } => {
            let mut rng = case_rng(common.seed, 0);
            let out = audit_counts(dim, &eps, ellipsoids, &mut rng)?;
            let passed = out.passed();
            let d = &out.details;
            let summary = format!(
                "{} emitted (expected {}, bound {}), |G| = {}, grid max {}/{} (parallelepiped), {}/{} (ellipsoid)",
                d["emitted"],
                d["expected"],
                d["size_bound"],
                d["grid_size"],
                d["parallelepiped_grid_max"],
                d["parallelepiped_grid_bound"],
                d["ellipsoid_grid_max"],
                d["ellipsoid_grid_bound"],
            );
            let value = json!({ "passed": passed, "details": out.details, "counterexample": out.counterexample });
            Ok(Outcome { value, summary, passed })
        }
    }
}

fn cvp(cmd: CvpCmd, common: &Common) -> Result<Outcome, Failure> {
    match cmd {
        CvpCmd::Exact { input } => {
            let inst: LatticeInstance = read_json(&input)?;
            let s = SolutionRecord::from(exact_cvp(inst.basis(), inst.target())?);
            let summary = format!("closest {} at distance {}", s.vector, s.dist);
            Ok(Outcome::ok(to_value(&s), summary))
        }
        CvpCmd::Approx { input, eps, oracle, audit } => {
            let inst: LatticeInstance = read_json(&input)?;
            let gap = build_oracle(&oracle.oracle, common.seed, &oracle.oracle_alpha)?;
            let mut r = approx_cvp_with(inst.basis(), inst.target(), &eps, gap)?;
            let mut passed = true;
            if audit {
                r = r.audit(inst.basis(), inst.target())?;
                passed = r.ratio.as_ref().is_some_and(|q| *q <= int(1) + &eps);
            }
            let mut summary = format!("{} at distance {} after {} gap calls", r.vector, r.achieved_dist, r.oracle_calls);
            if let (Some(e), Some(q)) = (&r.exact_dist, &r.ratio) {
                summary.push_str(&format!(", exact {e}, ratio {q}"));
            }
            Ok(Outcome { value: to_value(&r), summary, passed })
        }
    }
}

fn gap(cmd: GapCmd, common: &Common) -> Result<Outcome, Failure> {
    let GapCmd::Solve { input, alpha, oracle } = cmd;
    let inst: LatticeInstance = read_json(&input)?;
    inst.gap_distance()?;
    if alpha <= int(1) {
        return Err(Failure::Usage(anyhow::anyhow!("gap factor must exceed 1, got {alpha}")));
    }
    let base = build_oracle(&oracle, common.seed, &int(2))?;
    let (result, calls, boosted) = if alpha >= int(2) {
        (base.query(&inst)?, 1, false)
    } else {
        let out = BoostedGap::new(BoostConfig::new(&alpha - int(1), base)?).solve(&inst)?;
        (out.result, out.oracle_calls, true)
    };
    let summary = format!(
        "{} after {calls} call(s) to `{oracle}`{}",
        if result.is_found() { "found" } else { "empty" },
        if boosted { " (boosted)" } else { "" }
    );
    let value = json!({ "result": result, "oracle_calls": calls, "boosted": boosted, "alpha": alpha.to_string() });
    Ok(Outcome::ok(value, summary))
}

fn ip(cmd: IpCmd) -> Result<Outcome, Failure> {
    let IpCmd::Reduce { input, solve } = cmd;
    let slab: Slab = read_json(&input)?;
    let inst = slab.reduce()?;
    let mut value = json!({ "instance": inst });
    let mut summary = format!("CVP instance of dimension {} at distance 1/2", inst.dim());
    if solve {
        let s = exact_cvp(inst.basis(), inst.target())?;
        let feasible = s.dist <= Rational::new(1.into(), 2.into());
        value["feasible"] = json!(feasible);
        value["closest"] = to_value(&SolutionRecord::from(s));
        if feasible {
            value["point"] = value["closest"]["coeffs"].clone();
        }
        summary.push_str(if feasible { "; feasible" } else { "; infeasible" });
    }
    Ok(Outcome::ok(value, summary))
}

fn campaign(cmd: CampaignCmd, common: &Common) -> Result<Outcome, Failure> {
    match cmd {
        CampaignCmd::Run { kind, dims, eps, samples, scheme, oracle, entry_bound, large } => {
            let params = CampaignParams {
                dims,
                eps,
                samples,
                seed: common.seed,
                scheme,
                oracle: oracle.oracle,
                alpha: oracle.oracle_alpha,
                entry_bound,
                large,
            };
            let report = run_campaign(&Campaign { kind, params })?;
            let summary = format!(
                "{kind}: {}/{} cases passed{}",
                report.cases - report.failures,
                report.cases,
                if report.passed { "" } else { " (counterexamples in the JSON report)" }
            );
            Ok(Outcome { value: to_value(&report), summary, passed: report.passed })
        }
        CampaignCmd::Replay { input } => {
            let cx: Counterexample = read_json(&input)?;
            let fails = replay(&cx)?;
            let summary = if fails { "counterexample still fails" } else { "counterexample no longer fails" };
            Ok(Outcome { value: json!({ "still_fails": fails }), summary: summary.into(), passed: !fails })
        }
    }
}

fn run(cli: Cli) -> Result<Outcome, Failure> {
    let common = cli.common.clone();
    match cli.command {
        Command::Cover(c) => cover(c, &common),
        Command::Cvp(c) => cvp(c, &common),
        Command::Gap(c) => gap(c, &common),
        Command::Ip(c) => ip(c),
        Command::Campaign(c) => campaign(c, &common),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let common = cli.common.clone();
    match run(cli) {
        Ok(out) => {
            let pretty = serde_json::to_string_pretty(&out.value).expect("results serialize");
            if let Some(path) = &common.out {
                if let Err(e) = fs::write(path, format!("{pretty}\n")) {
                    eprintln!("error: writing {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
            if common.json {
                println!("{pretty}");
            } else {
                println!("{}", out.summary);
            }
            ExitCode::from(if out.passed { 0 } else { 1 })
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Verification(e)) => {
            eprintln!("verification failure: {e:#}");
            ExitCode::from(1)
        }
    }
}
