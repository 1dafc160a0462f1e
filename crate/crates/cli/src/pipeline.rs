//! Executes a campaign spec into an evidence tree.

use std::collections::BTreeMap;
use std::time::Instant;

use pcv_core::aeb::{
    car, certificates, require_proof, summarize, AebScenario, CampaignSummary, Catalog, Certificates,
};
use pcv_core::algebra::{
    check_refinement, combine_union, combine_weak_merge, refine, weak_merge_tested, AlgebraError, RefinementRequest,
    UnionOp,
};
use pcv_core::evidence::{
    export_json, verify_assumption, verify_proof, verify_testing, Budget, Evidence, EvidenceError, ExhaustiveChecker,
    FiniteDomain, MixtureWeight, ProofCertificate, ProofChecker, TestConfig,
};
use pcv_core::trace::Composite;
use pcv_core::Contract;
use thiserror::Error;

use crate::spec::{CampaignSpec, Rule, SpecError};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("independence violation: {0}")]
    Independence(String),
    #[error("evidence `{node}`: {message}")]
    Failed { node: String, message: String },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Spec(_) => 2,
            RunError::Independence(_) => 4,
            RunError::Failed { .. } => 1,
        }
    }
}

pub struct Run {
    pub root: Evidence,
    pub summary: CampaignSummary,
    /// Effective spec, without settings that must not change the result.
    pub config: serde_json::Value,
}

impl Run {
    pub fn evidence_json(&self) -> String {
        export_json(&self.root, Some(self.config.clone()))
    }
}

struct Context<'a> {
    spec: &'a CampaignSpec,
    contracts: BTreeMap<String, Contract>,
    certs: Certificates,
    scenario: AebScenario,
    car: Composite,
    workers: usize,
    done: BTreeMap<String, Evidence>,
}

fn fail(node: &str, e: impl ToString) -> RunError {
    RunError::Failed { node: node.into(), message: e.to_string() }
}

fn from_algebra(node: &str, e: AlgebraError) -> RunError {
    match e {
        AlgebraError::Independence(m) => RunError::Independence(format!("evidence `{node}` shares testing stream {m}")),
        other => fail(node, other),
    }
}

impl Context<'_> {
    fn certificate(&self, name: &str) -> (&ProofCertificate, &dyn ProofChecker, &str) {
        let c = &self.certs;
        match name {
            "perception_known" => (&c.perception_known.0, &c.perception_known.1, "perception_known"),
            "speed" => (&c.speed.0, &c.speed.1, "speed"),
            "filter" => (&c.filter.0, &c.filter.1, "filter"),
            "brakes" => (&c.brakes.0, &c.brakes.1, "brakes"),
            "keeps_distance" => (&c.keeps_distance.0, &c.keeps_distance.1, "keeps_distance"),
            other => unreachable!("validated certificate name `{other}`"),
        }
    }

    fn domain(&self, name: &str) -> &FiniteDomain {
        match name {
            "control" => &self.certs.control_domain,
            "perception" => &self.certs.perception_domain,
            other => unreachable!("validated domain name `{other}`"),
        }
    }

    fn test_config(&self, samples: u64, confidence: f64, stream: &str) -> TestConfig {
        let mut cfg = TestConfig::new(Budget::Samples(samples), confidence, self.spec.seed, stream);
        cfg.workers = self.workers;
        cfg
    }

    fn eval(&mut self, name: &str) -> Result<Evidence, RunError> {
        if let Some(e) = self.done.get(name) {
            return Ok(e.clone());
        }
        let node = self.spec.evidence.iter().find(|e| e.name == name).expect("validated reference");
        let label = node.label.clone().unwrap_or_else(|| name.to_string());
        let e = match &node.rule {
            Rule::Test { contract, samples, confidence, stream, .. } => {
                let cfg = self.test_config(*samples, *confidence, stream);
                verify_testing(&label, &self.contracts[contract], &self.scenario, &self.car, &cfg)
                    .map_err(|e| fail(name, e))?
            }
            Rule::WeakMergeTest { certificate, contract, samples, confidence, stream, .. } => {
                let cfg = self.test_config(*samples, *confidence, stream);
                let (cert, checker, proved) = self.certificate(certificate);
                let e = weak_merge_tested(
                    (&label, &label, &label),
                    cert,
                    checker,
                    &self.contracts[proved],
                    &self.contracts[contract],
                    &self.scenario,
                    &self.car,
                    &cfg,
                )
                .map_err(|e| from_algebra(name, e))?;
                require_proof(&e.children[0]).map_err(|e| fail(name, e))?;
                e
            }
            Rule::Proof { certificate, contract } => {
                let (cert, checker, _) = self.certificate(certificate);
                let e = verify_proof(&label, cert, checker, &self.contracts[contract]);
                require_proof(&e).map_err(|e| fail(name, e))?;
                e
            }
            Rule::Assumption { contract, p, c, justification } => {
                verify_assumption(&label, &self.contracts[contract], *p, *c, justification)
                    .map_err(|e: EvidenceError| fail(name, e))?
            }
            Rule::Compose { operands } | Rule::Conjoin { operands } | Rule::StrongMerge { operands } => {
                let op = match &node.rule {
                    Rule::Compose { .. } => UnionOp::Compose,
                    Rule::Conjoin { .. } => UnionOp::Conjoin,
                    _ => UnionOp::StrongMerge,
                };
                let mut acc = self.eval(&operands[0])?;
                for o in &operands[1..] {
                    let next = self.eval(o)?;
                    acc = combine_union(op, &label, acc, next).map_err(|e| from_algebra(name, e))?;
                }
                acc
            }
            Rule::WeakMerge { operands, weight, weight_provenance } => {
                let (a, b) = (self.eval(&operands[0])?, self.eval(&operands[1])?);
                let w = MixtureWeight { p: *weight, provenance: weight_provenance.clone() };
                combine_weak_merge(&label, a, b, w).map_err(|e| from_algebra(name, e))?
            }
            Rule::Refine { operand, contract, domain, certificate } => {
                let inner = self.eval(operand)?;
                let target = &self.contracts[contract];
                let checker = ExhaustiveChecker::new("exhaustive-refinement");
                let request = match (domain, certificate) {
                    (Some(d), _) => RefinementRequest::ExhaustiveFiniteDomain { domain: self.domain(d), checker: &checker },
                    (None, Some(c)) => {
                        let (certificate, checker, _) = self.certificate(c);
                        RefinementRequest::Certificate { certificate, checker }
                    }
                    (None, None) => RefinementRequest::Syntactic,
                };
                let witness = check_refinement(&inner.contract, target, request).map_err(|e| from_algebra(name, e))?;
                refine(&label, inner, target, witness).map_err(|e| from_algebra(name, e))?
            }
        };
        self.done.insert(name.to_string(), e.clone());
        Ok(e)
    }
}

/// Validates and runs `spec`. Wall time is reported in the summary only.
pub fn execute(spec: &CampaignSpec) -> Result<Run, RunError> {
    spec.validate()?;
    let start = Instant::now();
    let config = spec.scenario_config();
    let mut ctx = Context {
        spec,
        contracts: spec.contracts()?,
        certs: certificates(&Catalog::build(), &config),
        scenario: AebScenario::new(config.clone()),
        car: car(&config.sensors),
        workers: spec.workers.unwrap_or_else(pcv_core::trace::default_workers),
        done: BTreeMap::new(),
    };
    let root = ctx.eval(&spec.root)?;
    root.validate().map_err(|e| fail(&spec.root, e))?;
    let budget = spec
        .evidence
        .iter()
        .find_map(|e| match e.rule {
            Rule::Test { samples, .. } | Rule::WeakMergeTest { samples, .. } => Some(Budget::Samples(samples)),
            _ => None,
        })
        .unwrap_or(Budget::Samples(0));
    let summary = summarize(&root, spec.seed, budget, Some(start.elapsed().as_secs_f64()));
    let mut effective = spec.clone();
    effective.workers = None;
    effective.output = None;
    effective.scenario_params = Some(config);
    let config = serde_json::to_value(&effective).expect("spec serializes");
    Ok(Run { root, summary, config })
}
