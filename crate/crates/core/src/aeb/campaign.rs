//! End-to-end verification of Keeps Distance in the naive and optimized styles.

use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::catalog::Catalog;
use super::components::{brakes, perception, safety_filter, speedometer};
use super::reach::{KeepsDistanceChecker, ReachPayload};
use super::scenario::{AebConfig, AebScenario};
use super::{car, model};
use crate::algebra::{
    check_refinement, combine_union, refine, weak_merge_tested, AlgebraError,
    RefinementRequest, UnionOp,
};
use crate::evidence::{
    verify_assumption, verify_proof, verify_testing, Budget, Evidence, EvidenceError, EvidenceKind, ExhaustiveChecker,
    FiniteDomain, ProofCertificate, TestConfig,
};
use crate::num::Num;
use crate::stats::ProbBound;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Naive,
    Optimized,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Naive => "naive",
            Mode::Optimized => "optimized",
        }
    }
}

#[derive(Debug, Error)]
pub enum CampaignError {
    #[error(transparent)]
    Evidence(#[from] EvidenceError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("proof `{id}` did not check: {reason}")]
    Proof { id: String, reason: String },
}

/// Campaign settings. Perception testing draws from stream `perception`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignOptions {
    pub mode: Mode,
    pub budget: Budget,
    pub seed: u64,
    pub confidence: f64,
    /// Assumed bound for the brake actuator.
    pub actuator: ProbBound,
    pub workers: usize,
    pub timing: bool,
    pub scenario: AebConfig,
}

impl CampaignOptions {
    pub fn new(mode: Mode, samples: u64, seed: u64) -> Self {
        CampaignOptions {
            mode,
            budget: Budget::Samples(samples),
            seed,
            confidence: 0.999,
            actuator: ProbBound { p: 0.99, c: 0.999 },
            workers: 1,
            timing: false,
            scenario: AebConfig::default(),
        }
    }
}

/// One row of the campaign table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub mode: Mode,
    pub seed: u64,
    pub budget: Budget,
    pub bound: ProbBound,
    pub perception: ProbBound,
    pub samples: u64,
    pub rejected: u64,
    /// Fraction of draws in the statically decided region (optimized only).
    pub static_fraction: Option<f64>,
    pub wall_seconds: Option<f64>,
}

/// Proof certificates and checkers used by the campaign.
pub struct Certificates {
    pub perception_known: (ProofCertificate, ExhaustiveChecker),
    pub speed: (ProofCertificate, ExhaustiveChecker),
    pub filter: (ProofCertificate, ExhaustiveChecker),
    pub brakes: (ProofCertificate, ExhaustiveChecker),
    pub control_domain: FiniteDomain,
    pub perception_domain: FiniteDomain,
    pub keeps_distance: (ProofCertificate, KeepsDistanceChecker),
}

fn m(v: i64) -> Num {
    Num::milli(v)
}

fn nums(values: &[i64]) -> Vec<Num> {
    values.iter().map(|&v| m(v)).collect()
}

fn cert(id: &str, contract: &crate::lang::Contract, checker: &str, domain: &FiniteDomain) -> ProofCertificate {
    ProofCertificate::new(id, contract, checker, serde_json::to_value(domain).expect("domain serializes"))
}

pub fn certificates(cat: &Catalog, config: &AebConfig) -> Certificates {
    let params = &config.sensors;
    let weather = vec![Num::int(0), Num::int(1), Num::int(2), Num::int(3)];
    let widths = nums(&[1_200, 1_799, 1_800, 3_200]);

    let known_domain = FiniteDomain::new(1)
        .scene(super::vars::WEATHER, weather.clone())
        .scene(super::vars::WIDTH, widths.clone())
        .scene(super::vars::BEHIND_CAR, vec![Num::int(1)])
        .grid(super::vars::LEAD_DIST, nums(&[0, 10_000, 60_000]))
        .grid(super::vars::RADAR_U, nums(&[0, 999]))
        .grid(super::vars::RADAR_ERR, nums(&[-100, 0, 100]))
        .grid(super::vars::RADAR_OFFSET, nums(&[1_000, 10_000]))
        .grid(super::vars::LASER_U, nums(&[0, 999]))
        .grid(super::vars::LASER_ERR, nums(&[-100, 0, 100]))
        .grid(super::vars::LASER_FRAC, nums(&[0, 999]))
        .grid(super::vars::CAMERA_ERR, nums(&[-1_000, 0, 1_000]));
    let known_checker =
        ExhaustiveChecker::new("exhaustive-perception").with_component(Arc::new(perception(params)));

    let speed_domain = FiniteDomain::new(1).grid(super::vars::EGO_SPEED, nums(&[0, 2_700, 5_400]));
    let speed_checker = ExhaustiveChecker::new("exhaustive-speedometer").with_component(speedometer(params));

    let filter_domain = FiniteDomain::new(2)
        .grid("speed", nums(&[0, 100, 2_700, 5_300, 5_400]))
        .grid("dist", nums(&[0, 6_600, 6_700, 6_800, 60_000]))
        .grid("desired_throttle", nums(&[-1_000, 0, 1_000]));
    let filter_checker = ExhaustiveChecker::new("exhaustive-filter").with_component(safety_filter(params));

    let brakes_domain = FiniteDomain::new(1).grid("modulated_throttle", nums(&[-1_000, 0, 1_000]));
    let brakes_checker = ExhaustiveChecker::new("exhaustive-brakes").with_component(brakes(params));

    let control_domain = FiniteDomain::new(2)
        .grid("speed", nums(&[0, 2_700]))
        .grid("dist", nums(&[6_700, 12_000]))
        .grid("p_buffer_dist", nums(&[model::p_buffer_dist(0), model::p_buffer_dist(2_700)]))
        .grid("modulated_throttle", nums(&[-1_000, 0]))
        .grid("throttle", nums(&[-1_000, 0]));

    let perception_domain = FiniteDomain::new(2)
        .scene(super::vars::WEATHER, weather)
        .scene(super::vars::WIDTH, widths)
        .scene(super::vars::BEHIND_CAR, vec![Num::int(0), Num::int(1)])
        .grid(super::vars::LEAD_DIST, nums(&[10_000]))
        .grid("dist", nums(&[9_800, 9_900, 10_100, 10_300]));

    let obligation = KeepsDistanceChecker::theorem(cat);
    let reach = serde_json::to_value(ReachPayload::default()).expect("payload serializes");

    Certificates {
        perception_known: (
            cert("perception-known-grid", &cat.perception_known, "exhaustive-perception", &known_domain),
            known_checker,
        ),
        speed: (cert("speedometer-grid", &cat.speed, "exhaustive-speedometer", &speed_domain), speed_checker),
        filter: (cert("filter-grid", &cat.filter, "exhaustive-filter", &filter_domain), filter_checker),
        brakes: (cert("brakes-grid", &cat.brakes, "exhaustive-brakes", &brakes_domain), brakes_checker),
        control_domain,
        perception_domain,
        keeps_distance: (
            ProofCertificate::new("keeps-distance-reachability", &obligation, KeepsDistanceChecker::ID, reach),
            KeepsDistanceChecker::new(),
        ),
    }
}

/// Fails unless a proof node was accepted.
pub fn require_proof(e: &Evidence) -> Result<(), CampaignError> {
    if e.bound == ProbBound::CERTAIN {
        return Ok(());
    }
    let id = e.meta.certificate.as_ref().map_or_else(String::new, |c| c.id.clone());
    Err(CampaignError::Proof { id, reason: e.meta.diagnostics.join("; ") })
}

/// Summarises a Keeps Distance evidence tree. The mode is optimized when the
/// tree contains a weak-merge test; the perception bound is that of the first
/// tested node.
pub fn summarize(root: &Evidence, seed: u64, budget: Budget, wall_seconds: Option<f64>) -> CampaignSummary {
    let nodes = root.walk();
    let merged = nodes.iter().find(|e| e.kind == EvidenceKind::WeakMergeTested);
    let tested = merged.or_else(|| nodes.iter().find(|e| e.kind == EvidenceKind::Test));
    let outcome = tested.and_then(|e| e.meta.outcome.clone()).unwrap_or_default();
    let static_fraction = merged.map(|wm| {
        let sub = wm.children.get(1).and_then(|t| t.meta.outcome.clone()).unwrap_or_default();
        let rejected_static = outcome.n_rejected - sub.n_rejected;
        (outcome.n_static_pass + rejected_static) as f64 / outcome.n_sampled.max(1) as f64
    });
    CampaignSummary {
        mode: if merged.is_some() { Mode::Optimized } else { Mode::Naive },
        seed,
        budget,
        bound: root.bound,
        perception: tested.map_or(ProbBound::REFUTED, |e| e.bound),
        samples: outcome.n_sampled,
        rejected: outcome.n_rejected,
        static_fraction,
        wall_seconds,
    }
}

/// Runs one campaign and returns its evidence tree and summary row.
pub fn run_campaign(opts: &CampaignOptions) -> Result<(Evidence, CampaignSummary), CampaignError> {
    let start = Instant::now();
    let cat = Catalog::build();
    let certs = certificates(&cat, &opts.scenario);
    let scenario = AebScenario::new(opts.scenario.clone());
    let vehicle = car(&opts.scenario.sensors);
    let mut cfg = TestConfig::new(opts.budget, opts.confidence, opts.seed, "perception");
    cfg.workers = opts.workers;
    cfg.timing = opts.timing;

    let perception_ev = match opts.mode {
        Mode::Naive => verify_testing("PerceptionSystem()", &cat.perception, &scenario, &vehicle, &cfg)?,
        Mode::Optimized => {
            let (cert, checker) = &certs.perception_known;
            let merged = weak_merge_tested(
                ("PerceptionSystem()", "PerceptionSystem()", "PerceptionSystem()"),
                cert,
                checker,
                &cat.perception_known,
                &cat.perception_unknown,
                &scenario,
                &vehicle,
                &cfg,
            )?;
            require_proof(&merged.children[0])?;
            let checker = ExhaustiveChecker::new("exhaustive-refinement");
            let witness = check_refinement(
                &merged.contract,
                &cat.perception,
                RefinementRequest::ExhaustiveFiniteDomain { domain: &certs.perception_domain, checker: &checker },
            )?;
            refine("PerceptionSystem()", merged, &cat.perception, witness)?
        }
    };

    let (c, k) = &certs.speed;
    let speed_ev = verify_proof("Speedometer()", c, k, &cat.speed);
    require_proof(&speed_ev)?;

    let (c, k) = &certs.filter;
    let filter_ev = verify_proof("ThrottleSafetyFilter()", c, k, &cat.filter);
    require_proof(&filter_ev)?;
    let (c, k) = &certs.brakes;
    let brakes_ev = verify_proof("Brakes()", c, k, &cat.brakes);
    require_proof(&brakes_ev)?;
    let parts = combine_union(UnionOp::Compose, "ControlSystem()", filter_ev, brakes_ev)?;
    let checker = ExhaustiveChecker::new("exhaustive-refinement");
    let witness = check_refinement(
        &parts.contract,
        &cat.control,
        RefinementRequest::ExhaustiveFiniteDomain { domain: &certs.control_domain, checker: &checker },
    )?;
    let control_ev = refine("ControlSystem()", parts, &cat.control, witness)?;

    let actuator_ev = verify_assumption(
        "CarActionControls()",
        &cat.actuator,
        opts.actuator.p,
        opts.actuator.c,
        "brake actuator specification, not verified by this tool",
    )?;

    let mut system = combine_union(UnionOp::Compose, "Car()", perception_ev, speed_ev)?;
    system = combine_union(UnionOp::Compose, "Car()", system, control_ev)?;
    system = combine_union(UnionOp::Compose, "Car()", system, actuator_ev)?;

    let (c, k) = &certs.keeps_distance;
    let witness = check_refinement(
        &system.contract,
        &cat.keeps_distance,
        RefinementRequest::Certificate { certificate: c, checker: k },
    )?;
    let root = refine("Car()", system, &cat.keeps_distance, witness)?;

    let seconds = opts.timing.then(|| start.elapsed().as_secs_f64());
    let summary = summarize(&root, opts.seed, opts.budget, seconds);
    Ok((root, summary))
}

pub const CSV_HEADER: &str =
    "mode,budget,seed,bound,confidence,perception_bound,samples,rejected,static_fraction,wall_seconds";

fn budget_text(b: &Budget) -> String {
    match b {
        Budget::Samples(n) => n.to_string(),
        Budget::Simulations(n) => format!("{n} simulations"),
        Budget::Seconds(s) => format!("{s} s"),
    }
}

fn opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(String::new, |x| format!("{x:.digits$}"))
}

/// One CSV line per summary, under [`CSV_HEADER`].
pub fn summary_csv(rows: &[CampaignSummary]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{:.6},{:.6},{:.6},{},{},{},{}\n",
            r.mode.name(),
            budget_text(&r.budget),
            r.seed,
            r.bound.p,
            r.bound.c,
            r.perception.p,
            r.samples,
            r.rejected,
            opt(r.static_fraction, 4),
            opt(r.wall_seconds, 3),
        ));
    }
    out
}

pub const TABLE_HEADER: &str = "budget,seed,naive_bound,naive_confidence,optimized_bound,optimized_confidence,static_fraction,naive_seconds,optimized_seconds";

/// Side-by-side rows of naive and optimized campaigns run at the same budget
/// and seed.
pub fn table_csv(rows: &[(CampaignSummary, CampaignSummary)]) -> String {
    let mut out = String::from(TABLE_HEADER);
    out.push('\n');
    for (n, o) in rows {
        out.push_str(&format!(
            "{},{},{:.6},{:.6},{:.6},{:.6},{},{},{}\n",
            budget_text(&n.budget),
            n.seed,
            n.bound.p,
            n.bound.c,
            o.bound.p,
            o.bound.c,
            opt(o.static_fraction, 4),
            opt(n.wall_seconds, 3),
            opt(o.wall_seconds, 3),
        ));
    }
    out
}
