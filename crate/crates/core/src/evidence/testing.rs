use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{Evidence, EvidenceError, EvidenceKind, TestSource};
use crate::lang::{eval_formula, satisfies, Contract, Formula, TruthValue, Verdict};
use crate::stats::TestingOutcome;
use crate::trace::{
    par_map, run_trace, substream, Component, EnvState, InitialState, Provenance, SceneDraw, Scenario,
};

/// How much testing to do.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Budget {
    /// Scene draws, including rejected ones.
    Samples(u64),
    /// Simulated traces; rejected and statically decided scenes are free.
    Simulations(u64),
    /// Wall-clock seconds, converted once to a sample count by timing a short
    /// calibration run.
    Seconds(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestConfig {
    pub budget: Budget,
    pub confidence: f64,
    pub seed: u64,
    pub stream: String,
    pub workers: usize,
    /// Record wall-clock time in the outcome (makes output nondeterministic).
    #[serde(default)]
    pub timing: bool,
}

impl TestConfig {
    pub fn new(budget: Budget, confidence: f64, seed: u64, stream: impl Into<String>) -> Self {
        TestConfig { budget, confidence, seed, stream: stream.into(), workers: 1, timing: false }
    }
}

/// What happened to one scene draw.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SceneResult {
    /// The scene was outside the scenario's support. `in_static` records whether
    /// its drawn state satisfied the static check.
    Rejected { in_static: bool },
    /// The initial state satisfies the statically checked assumption.
    StaticPass,
    Verdict(Verdict),
    /// The trace could not be produced or evaluated; excluded from the counts.
    Aborted(String),
}

fn classify<S: Scenario>(
    scenario: &S,
    component: &dyn Component,
    contract: &Contract,
    static_check: Option<&Formula>,
    seed: u64,
    stream: &str,
    index: u64,
) -> SceneResult {
    let mut rng = substream(seed, stream, index);
    let in_static = |env: &EnvState| {
        static_check.is_some_and(|f| eval_formula(f, &InitialState(env), 0) == TruthValue::True)
    };
    let (env, sim) = match scenario.sample_scene(&mut rng) {
        SceneDraw::Rejected { env } => return SceneResult::Rejected { in_static: in_static(&env) },
        SceneDraw::Accepted { env, sim } => (env, sim),
    };
    if in_static(&env) {
        return SceneResult::StaticPass;
    }
    let provenance = Provenance { scenario: scenario.id().into(), seed, stream: stream.into(), scene: index };
    let trace = match run_trace(scenario, component, env, sim, &mut rng, provenance) {
        Ok(t) => t,
        Err(e) => return SceneResult::Aborted(format!("scene {index}: {e}")),
    };
    match satisfies(&trace, contract) {
        Ok(v) => SceneResult::Verdict(v),
        Err(e) => SceneResult::Aborted(format!("scene {index}: {e}")),
    }
}

const MAX_DIAGNOSTICS: usize = 20;

/// Draws scenes in index order until the budget is spent and tallies them.
///
/// With `static_check`, accepted scenes whose initial state satisfies it are
/// counted as passing without simulation. Results do not depend on the
/// worker count. Also returns diagnostics and the number of rejected scenes
/// that satisfied `static_check`.
pub fn sample_outcomes<S: Scenario>(
    scenario: &S,
    component: &dyn Component,
    contract: &Contract,
    static_check: Option<&Formula>,
    cfg: &TestConfig,
) -> Result<(TestingOutcome, Vec<String>, u64), EvidenceError> {
    let mut diagnostics = Vec::new();
    let (target, simulations_only) = match cfg.budget {
        Budget::Samples(n) => (n, false),
        Budget::Simulations(n) => (n, true),
        Budget::Seconds(s) => {
            let n = calibrate(scenario, component, contract, static_check, cfg, s)?;
            diagnostics.push(format!("{s} second budget calibrated to {n} samples"));
            (n, false)
        }
    };
    let mut outcome = TestingOutcome::default();
    let mut rejected_static = 0u64;
    let mut counted = 0u64;
    let mut next = 0u64;
    let cap = 1000 + 100 * target;
    while counted < target {
        if next > cap {
            return Err(EvidenceError::BudgetUnreachable { draws: next });
        }
        let chunk = (target - counted).max(16) as usize;
        let base = next;
        let results = par_map(cfg.workers, chunk, |j| {
            classify(scenario, component, contract, static_check, cfg.seed, &cfg.stream, base + j as u64)
        });
        for r in results {
            if counted >= target {
                break;
            }
            next += 1;
            let counts = match &r {
                SceneResult::Rejected { .. } | SceneResult::StaticPass => !simulations_only,
                SceneResult::Verdict(_) => true,
                SceneResult::Aborted(_) => false,
            };
            match r {
                SceneResult::Rejected { in_static } => {
                    outcome.n_rejected += 1;
                    rejected_static += u64::from(in_static);
                }
                SceneResult::StaticPass => {
                    outcome.n_static_pass += 1;
                    outcome.n_verified += 1;
                }
                SceneResult::Verdict(Verdict::Verified) => outcome.n_verified += 1,
                SceneResult::Verdict(Verdict::AViolated) => outcome.n_a_violated += 1,
                SceneResult::Verdict(Verdict::GViolated) => outcome.n_g_violated += 1,
                SceneResult::Aborted(msg) => {
                    outcome.n_aborted += 1;
                    if diagnostics.len() < MAX_DIAGNOSTICS {
                        diagnostics.push(msg);
                    }
                }
            }
            if counts {
                counted += 1;
            }
        }
    }
    outcome.n_sampled = outcome.n_rejected + outcome.n_verified + outcome.n_a_violated + outcome.n_g_violated;
    Ok((outcome, diagnostics, rejected_static))
}

const CALIBRATION_SAMPLES: u64 = 10;

fn calibrate<S: Scenario>(
    scenario: &S,
    component: &dyn Component,
    contract: &Contract,
    static_check: Option<&Formula>,
    cfg: &TestConfig,
    seconds: f64,
) -> Result<u64, EvidenceError> {
    if !(seconds > 0.0) {
        return Err(EvidenceError::Calibration(format!("budget of {seconds} seconds")));
    }
    let stream = format!("{}/calibration", cfg.stream);
    let start = Instant::now();
    for i in 0..CALIBRATION_SAMPLES {
        classify(scenario, component, contract, static_check, cfg.seed, &stream, i);
    }
    let per_sample = start.elapsed().as_secs_f64() / CALIBRATION_SAMPLES as f64;
    let n = (seconds * cfg.workers.max(1) as f64 / per_sample.max(1e-9)).floor() as u64;
    Ok(n.max(1))
}

/// Testing evidence: sample scenes, classify each trace against the contract,
/// and bound the satisfaction probability with Clopper-Pearson.
pub fn verify_testing<S: Scenario>(
    component_name: &str,
    contract: &Contract,
    scenario: &S,
    component: &dyn Component,
    cfg: &TestConfig,
) -> Result<Evidence, EvidenceError> {
    let start = Instant::now();
    let (mut outcome, diagnostics, _) = sample_outcomes(scenario, component, contract, None, cfg)?;
    if outcome.n_eff() == 0 {
        return Err(EvidenceError::AllRejected(outcome.n_sampled));
    }
    if cfg.timing {
        outcome.wall_seconds = Some(start.elapsed().as_secs_f64());
    }
    let bound = outcome.bound(cfg.confidence)?;
    let mut e = Evidence::new(EvidenceKind::Test, component_name, contract.clone(), bound);
    e.meta.source = Some(testing_source(scenario, cfg));
    e.meta.outcome = Some(outcome);
    e.meta.diagnostics = diagnostics;
    Ok(e)
}

pub(crate) fn testing_source<S: Scenario>(scenario: &S, cfg: &TestConfig) -> TestSource {
    TestSource {
        scenario: scenario.id().into(),
        scenario_hash: scenario.hash(),
        seed: cfg.seed,
        stream: cfg.stream.clone(),
        budget: cfg.budget,
    }
}
