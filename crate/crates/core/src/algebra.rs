//! Contract operators and the rules that combine evidence through them.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evidence::{
    sample_outcomes, verify_proof, Evidence, EvidenceError, EvidenceKind, ExhaustiveChecker, FiniteDomain,
    MixtureWeight, ProofCertificate, ProofChecker, TestConfig, CheckOutcome,
};
use crate::lang::{simplify, statically_decidable, Contract, Formula};
use crate::stats::{ProbBound, TestingOutcome};
use crate::trace::{Component, Scenario, Trace};

fn f_and(a: &Formula, b: &Formula) -> Formula {
    Formula::and(a.clone(), b.clone())
}

fn f_or(a: Formula, b: Formula) -> Formula {
    Formula::or(a, b)
}

fn f_not(a: &Formula) -> Formula {
    Formula::not(a.clone())
}

fn f_implies(a: &Formula, b: &Formula) -> Formula {
    Formula::implies(a.clone(), b.clone())
}

fn build(name: String, a: Formula, g: Formula, c1: &Contract, c2: &Contract) -> Contract {
    let extra = c1.signature.iter().chain(&c2.signature).cloned().collect::<Vec<_>>();
    Contract::new(name, simplify(&a), simplify(&g)).with_signature(extra)
}

/// Guarantee shared by composition and conjunction:
/// `((A1 => G1) and (A2 => G2)) or (not A1 and not A2)`.
fn joint_guarantee(c1: &Contract, c2: &Contract) -> Formula {
    f_or(
        Formula::and(f_implies(&c1.assumptions, &c1.guarantees), f_implies(&c2.assumptions, &c2.guarantees)),
        Formula::and(f_not(&c1.assumptions), f_not(&c2.assumptions)),
    )
}

/// Assumptions `(A1 and A2) or (A1 and not G1) or (A2 and not G2)`: a trace
/// satisfies the composite exactly when it satisfies both operands.
pub fn op_compose(c1: &Contract, c2: &Contract) -> Contract {
    let (a1, g1, a2, g2) = (&c1.assumptions, &c1.guarantees, &c2.assumptions, &c2.guarantees);
    let a = f_or(f_or(f_and(a1, a2), f_and(a1, &f_not(g1))), f_and(a2, &f_not(g2)));
    build(format!("({}) || ({})", c1.name, c2.name), a, joint_guarantee(c1, c2), c1, c2)
}

pub fn op_conjoin(c1: &Contract, c2: &Contract) -> Contract {
    let a = f_or(c1.assumptions.clone(), c2.assumptions.clone());
    build(format!("({}) and ({})", c1.name, c2.name), a, joint_guarantee(c1, c2), c1, c2)
}

pub fn op_strong_merge(c1: &Contract, c2: &Contract) -> Contract {
    let (a1, g1, a2, g2) = (&c1.assumptions, &c1.guarantees, &c2.assumptions, &c2.guarantees);
    let g = f_or(f_or(f_and(g1, g2), f_not(a1)), f_not(a2));
    build(format!("({}) * ({})", c1.name, c2.name), f_and(a1, a2), g, c1, c2)
}

pub fn op_weak_merge(c1: &Contract, c2: &Contract) -> Contract {
    let a = f_or(c1.assumptions.clone(), c2.assumptions.clone());
    let g = f_or(f_or(c1.guarantees.clone(), c2.guarantees.clone()), Formula::not(a.clone()));
    build(format!("({}) >< ({})", c1.name, c2.name), a, g, c1, c2)
}

/// Operators with a union-bound combination rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnionOp {
    Compose,
    Conjoin,
    StrongMerge,
}

impl UnionOp {
    pub fn apply(self, c1: &Contract, c2: &Contract) -> Contract {
        match self {
            UnionOp::Compose => op_compose(c1, c2),
            UnionOp::Conjoin => op_conjoin(c1, c2),
            UnionOp::StrongMerge => op_strong_merge(c1, c2),
        }
    }

    fn kind(self) -> EvidenceKind {
        match self {
            UnionOp::Compose => EvidenceKind::Composed,
            UnionOp::Conjoin => EvidenceKind::Conjoined,
            UnionOp::StrongMerge => EvidenceKind::StrongMerged,
        }
    }
}

/// The trace formula `C1 <= C2` must satisfy:
/// `(A2 => A1) and ((A1 => G1) => (A2 => G2))`.
pub fn refinement_formula(c1: &Contract, c2: &Contract) -> Formula {
    Formula::and(
        f_implies(&c2.assumptions, &c1.assumptions),
        Formula::implies(c1.implication(), c2.implication()),
    )
}

/// The refinement obligation packaged as a contract with trivial assumptions,
/// so proof checkers can discharge it.
pub fn refinement_obligation(c1: &Contract, c2: &Contract) -> Contract {
    let extra: Vec<String> = c1.signature.iter().chain(&c2.signature).cloned().collect();
    Contract::new(format!("({}) <= ({})", c1.name, c2.name), Formula::TRUE, refinement_formula(c1, c2))
        .with_signature(extra)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum RefinementMethod {
    /// Structurally identical assumption and guarantee formulas.
    Syntactic,
    /// The obligation holds on every trace of the recorded finite domain.
    ExhaustiveFiniteDomain { scope: String },
    /// A proof checker accepted a certificate for the obligation.
    Certificate { checker: String, certificate: String, payload_hash: String, scope: String },
}

impl RefinementMethod {
    pub fn describe(&self) -> String {
        match self {
            RefinementMethod::Syntactic => "Syntactic identity".into(),
            RefinementMethod::ExhaustiveFiniteDomain { scope } => format!("Exhaustive finite domain: {scope}"),
            RefinementMethod::Certificate { checker, certificate, scope, .. } => {
                format!("Certificate '{certificate}' checked by {checker}: {scope}")
            }
        }
    }
}

/// Records how `from <= to` was established.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementWitness {
    pub from: String,
    pub to: String,
    pub method: RefinementMethod,
}

/// How to attempt a refinement check.
pub enum RefinementRequest<'a> {
    Syntactic,
    ExhaustiveFiniteDomain { domain: &'a FiniteDomain, checker: &'a ExhaustiveChecker },
    Certificate { certificate: &'a ProofCertificate, checker: &'a dyn ProofChecker },
}

#[derive(Debug, Error)]
pub enum AlgebraError {
    #[error("contracts are not syntactically identical")]
    NotSyntactic,
    #[error("refinement fails: {reason}")]
    Counterexample { reason: String, trace: Option<Box<Trace>> },
    #[error("refinement check refused: {0}")]
    Refused(String),
    #[error("witness is for {from} <= {to}, not for the given contracts")]
    WitnessMismatch { from: String, to: String },
    #[error("evidence is not independent: both sides use test stream {0}")]
    Independence(String),
    #[error("mixture weight needs a recorded provenance")]
    MissingWeightProvenance,
    #[error("mixture weight {0} outside [0, 1]")]
    WeightRange(f64),
    #[error("assumption conjunct `{0}` is not statically decidable; use the mixture rule instead")]
    NotStatic(String),
    #[error(transparent)]
    Evidence(#[from] EvidenceError),
}

pub fn check_refinement(
    c1: &Contract,
    c2: &Contract,
    request: RefinementRequest<'_>,
) -> Result<RefinementWitness, AlgebraError> {
    let method = match request {
        RefinementRequest::Syntactic => {
            if c1.assumptions != c2.assumptions || c1.guarantees != c2.guarantees {
                return Err(AlgebraError::NotSyntactic);
            }
            RefinementMethod::Syntactic
        }
        RefinementRequest::ExhaustiveFiniteDomain { domain, checker } => {
            match checker.check_domain(domain, &refinement_obligation(c1, c2)) {
                CheckOutcome::Accepted { scope } => RefinementMethod::ExhaustiveFiniteDomain { scope },
                CheckOutcome::Rejected { reason, counterexample } => {
                    return Err(AlgebraError::Counterexample { reason, trace: counterexample.map(Box::new) })
                }
                CheckOutcome::Refused { reason } => return Err(AlgebraError::Refused(reason)),
            }
        }
        RefinementRequest::Certificate { certificate, checker } => {
            let obligation = refinement_obligation(c1, c2);
            if certificate.target != obligation.hash() {
                return Err(AlgebraError::Refused("certificate targets a different obligation".into()));
            }
            match checker.check(certificate, &obligation) {
                CheckOutcome::Accepted { scope } => RefinementMethod::Certificate {
                    checker: checker.id().into(),
                    certificate: certificate.id.clone(),
                    payload_hash: certificate.payload_hash(),
                    scope,
                },
                CheckOutcome::Rejected { reason, counterexample } => {
                    return Err(AlgebraError::Counterexample { reason, trace: counterexample.map(Box::new) })
                }
                CheckOutcome::Refused { reason } => return Err(AlgebraError::Refused(reason)),
            }
        }
    };
    Ok(RefinementWitness { from: c1.hash(), to: c2.hash(), method })
}

/// Carries the bound of `e1` over to the refined contract `c2`.
pub fn refine(
    component: &str,
    e1: Evidence,
    c2: &Contract,
    witness: RefinementWitness,
) -> Result<Evidence, AlgebraError> {
    if witness.from != e1.contract_hash || witness.to != c2.hash() {
        return Err(AlgebraError::WitnessMismatch { from: witness.from, to: witness.to });
    }
    let mut e = Evidence::new(EvidenceKind::Refined, component, c2.clone(), e1.bound);
    e.meta.witness = Some(witness);
    e.children.push(e1);
    Ok(e)
}

/// Test substreams `(scenario hash, seed, stream)` used anywhere in a tree.
fn test_streams(e: &Evidence) -> BTreeSet<(String, u64, String)> {
    e.walk()
        .into_iter()
        .filter_map(|n| n.meta.source.as_ref())
        .map(|s| (s.scenario_hash.clone(), s.seed, s.stream.clone()))
        .collect()
}

pub fn check_independent(e1: &Evidence, e2: &Evidence) -> Result<(), AlgebraError> {
    let shared: Vec<_> = test_streams(e1).intersection(&test_streams(e2)).cloned().collect();
    match shared.first() {
        Some((hash, seed, stream)) => {
            Err(AlgebraError::Independence(format!("'{stream}' (seed {seed}, scenario {}…)", &hash[..hash.len().min(12)])))
        }
        None => Ok(()),
    }
}

/// Union-bound rule: `(max(0, p1 + p2 - 1), c1 * c2)`.
pub fn union_bound(b1: ProbBound, b2: ProbBound) -> ProbBound {
    ProbBound { p: (b1.p - (1.0 - b2.p)).max(0.0), c: b1.c * b2.c }
}

pub fn combine_union(op: UnionOp, component: &str, e1: Evidence, e2: Evidence) -> Result<Evidence, AlgebraError> {
    check_independent(&e1, &e2)?;
    let contract = op.apply(&e1.contract, &e2.contract);
    let mut e = Evidence::new(op.kind(), component, contract, union_bound(e1.bound, e2.bound));
    e.children = vec![e1, e2];
    Ok(e)
}

/// Mixture rule: `(p1 * w + p2 * (1 - w), c1 * c2)` with `w` bounding `P(T |= A1)`.
pub fn mixture_bound(b1: ProbBound, b2: ProbBound, w: f64) -> ProbBound {
    ProbBound { p: b1.p * w + b2.p * (1.0 - w), c: b1.c * b2.c }
}

/// Weak-merge rule for evidence gathered on the conditional distributions
/// `T | A1` (for `e1`) and `T | not A1` (for `e2`).
pub fn combine_weak_merge(
    component: &str,
    e1: Evidence,
    e2: Evidence,
    weight: MixtureWeight,
) -> Result<Evidence, AlgebraError> {
    if weight.provenance.trim().is_empty() {
        return Err(AlgebraError::MissingWeightProvenance);
    }
    if !(0.0..=1.0).contains(&weight.p) {
        return Err(AlgebraError::WeightRange(weight.p));
    }
    check_independent(&e1, &e2)?;
    let contract = op_weak_merge(&e1.contract, &e2.contract);
    let mut e = Evidence::new(EvidenceKind::WeakMerged, component, contract, mixture_bound(e1.bound, e2.bound, weight.p));
    e.meta.weight = Some(weight);
    e.children = vec![e1, e2];
    Ok(e)
}

/// Conjuncts of `A1` that are not conjuncts of `A2`; these must be decidable
/// from the initial scene.
pub fn static_part(c1: &Contract, c2: &Contract) -> Vec<Formula> {
    let shared: Vec<&Formula> = c2.assumptions.conjuncts();
    c1.assumptions.conjuncts().into_iter().filter(|f| !shared.contains(f)).cloned().collect()
}

/// Testing-based weak-merge checking.
///
/// `C1` is established by proof. Scenes whose initial state satisfies the
/// non-shared part of `A1` count as satisfying `C1 >< C2` without simulation;
/// the rest are simulated and checked against `C2`.
#[allow(clippy::too_many_arguments)]
pub fn weak_merge_tested<S: Scenario>(
    names: (&str, &str, &str),
    certificate: &ProofCertificate,
    checker: &dyn ProofChecker,
    c1: &Contract,
    c2: &Contract,
    scenario: &S,
    component: &dyn Component,
    cfg: &TestConfig,
) -> Result<Evidence, AlgebraError> {
    let (merged_name, proof_name, test_name) = names;
    let scene_vars = scenario.scene_vars();
    let statics = static_part(c1, c2);
    if let Some(bad) = statics.iter().find(|f| !statically_decidable(f, &scene_vars)) {
        return Err(AlgebraError::NotStatic(bad.to_string()));
    }
    let static_check = Formula::conjunction(statics);
    let contract = op_weak_merge(c1, c2);
    let proof = verify_proof(proof_name, certificate, checker, c1);
    if proof.bound != ProbBound::CERTAIN {
        let mut e = Evidence::new(EvidenceKind::WeakMergeTested, merged_name, contract, ProbBound { p: 0.0, c: cfg.confidence });
        e.meta.outcome = Some(TestingOutcome::default());
        e.meta.diagnostics.push(format!("proof of `{}` did not check", c1.name));
        e.children = vec![proof];
        return Ok(e);
    }
    let start = std::time::Instant::now();
    let (mut total, sub, diagnostics) = weak_merge_counts(scenario, component, c2, &static_check, cfg)?;
    if total.n_eff() == 0 {
        return Err(EvidenceError::AllRejected(total.n_sampled).into());
    }
    if cfg.timing {
        total.wall_seconds = Some(start.elapsed().as_secs_f64());
    }
    let source = crate::evidence::testing_source(scenario, cfg);

    let sub_bound = if sub.n_eff() > 0 { sub.bound(cfg.confidence).map_err(EvidenceError::from)? } else { ProbBound { p: 0.0, c: cfg.confidence } };
    let mut test = Evidence::new(EvidenceKind::Test, test_name, c2.clone(), sub_bound);
    test.meta.outcome = Some(sub);
    test.meta.source = Some(source.clone());

    let bound = total.bound(cfg.confidence).map_err(EvidenceError::from)?;
    let mut e = Evidence::new(EvidenceKind::WeakMergeTested, merged_name, contract, bound);
    e.meta.outcome = Some(total);
    e.meta.source = Some(source);
    e.meta.diagnostics = diagnostics;
    e.children = vec![proof, test];
    Ok(e)
}

/// Totals for the merged contract plus the sub-outcome of the scenes outside
/// the static region.
fn weak_merge_counts<S: Scenario>(
    scenario: &S,
    component: &dyn Component,
    c2: &Contract,
    static_check: &Formula,
    cfg: &TestConfig,
) -> Result<(TestingOutcome, TestingOutcome, Vec<String>), AlgebraError> {
    let (total, diagnostics, rejected_static) = sample_outcomes(scenario, component, c2, Some(static_check), cfg)?;
    let mut sub = total.clone();
    sub.n_verified -= total.n_static_pass;
    sub.n_static_pass = 0;
    sub.n_rejected -= rejected_static;
    sub.n_sampled = sub.n_rejected + sub.n_verified + sub.n_a_violated + sub.n_g_violated;
    sub.wall_seconds = None;
    Ok((total, sub, diagnostics))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_formula;

    fn c(a: &str, g: &str) -> Contract {
        Contract::parse("c", a, g).unwrap()
    }

    #[test]
    fn symbolic_shapes() {
        let (c1, c2) = (c("a1 > 0", "g1 > 0"), c("a2 > 0", "g2 > 0"));
        let comp = op_compose(&c1, &c2);
        assert_eq!(
            comp.assumptions,
            parse_formula("((a1 > 0 and a2 > 0) or (a1 > 0 and not (g1 > 0))) or (a2 > 0 and not (g2 > 0))").unwrap()
        );
        assert_eq!(
            comp.guarantees,
            parse_formula("((a1 > 0 implies g1 > 0) and (a2 > 0 implies g2 > 0)) or (not (a1 > 0) and not (a2 > 0))")
                .unwrap()
        );
        let wm = op_weak_merge(&c1, &c2);
        assert_eq!(wm.assumptions, parse_formula("a1 > 0 or a2 > 0").unwrap());
        assert_eq!(wm.guarantees, parse_formula("(g1 > 0 or g2 > 0) or not (a1 > 0 or a2 > 0)").unwrap());
        let sm = op_strong_merge(&c1, &c2);
        assert_eq!(sm.assumptions, parse_formula("a1 > 0 and a2 > 0").unwrap());
        assert_eq!(sm.guarantees, parse_formula("((g1 > 0 and g2 > 0) or not (a1 > 0)) or not (a2 > 0)").unwrap());
    }

    #[test]
    fn trivial_assumptions_simplify() {
        let (c1, c2) = (c("true", "g1 > 0"), c("true", "g2 > 0"));
        let comp = op_compose(&c1, &c2);
        assert_eq!(comp.assumptions, Formula::TRUE);
        assert_eq!(comp.guarantees, parse_formula("g1 > 0 and g2 > 0").unwrap());
        let conj = op_conjoin(&c1, &c2);
        assert_eq!(conj.assumptions, Formula::TRUE);
        assert_eq!(conj.guarantees, parse_formula("g1 > 0 and g2 > 0").unwrap());
    }

    #[test]
    fn union_rule_arithmetic() {
        let b = union_bound(ProbBound { p: 0.9255, c: 0.999 }, ProbBound { p: 0.99, c: 0.999 });
        assert!((b.p - 0.9155).abs() < 1e-12 && (b.c - 0.998001).abs() < 1e-12);
        let b = union_bound(ProbBound { p: 0.9559, c: 0.999 }, ProbBound { p: 0.99, c: 0.999 });
        assert!((b.p - 0.9459).abs() < 1e-12 && (b.c - 0.998001).abs() < 1e-12);
        let b = union_bound(ProbBound { p: 0.3, c: 0.9 }, ProbBound { p: 0.3, c: 0.9 });
        assert_eq!(b.p, 0.0);
        assert!((b.c - 0.81).abs() < 1e-12);
        let exact = union_bound(ProbBound { p: 0.42, c: 0.9 }, ProbBound::CERTAIN);
        assert_eq!(exact.p, 0.42);
    }

    #[test]
    fn mixture_arithmetic() {
        let one = ProbBound { p: 1.0, c: 1.0 };
        let b = mixture_bound(one, ProbBound { p: 0.9, c: 0.999 }, 0.35);
        assert!((b.p - 0.935).abs() < 1e-12);
        let same = mixture_bound(ProbBound { p: 0.7, c: 0.9 }, ProbBound { p: 0.7, c: 0.9 }, 0.123);
        assert!((same.p - 0.7).abs() < 1e-12);
        let zero = mixture_bound(one, ProbBound { p: 0.6, c: 0.9 }, 0.0);
        assert_eq!(zero.p, 0.6);
    }

    #[test]
    fn syntactic_refinement() {
        let c1 = c("x > 0", "y > 0");
        let w = check_refinement(&c1, &c1, RefinementRequest::Syntactic).unwrap();
        assert_eq!(w.method, RefinementMethod::Syntactic);
        assert!(check_refinement(&c1, &c("x > 0", "y > 1"), RefinementRequest::Syntactic).is_err());
    }

    #[test]
    fn finite_domain_refinement_counterexample() {
        let (c1, c2) = (c("true", "x > 0"), c("true", "x > 1"));
        let domain = FiniteDomain::new(1).grid("x", vec!["0.5".parse().unwrap(), "2".parse().unwrap()]);
        let checker = ExhaustiveChecker::new("grid");
        let r = check_refinement(&c1, &c2, RefinementRequest::ExhaustiveFiniteDomain { domain: &domain, checker: &checker });
        assert!(matches!(r, Err(AlgebraError::Counterexample { trace: Some(_), .. })));
        let back = check_refinement(&c2, &c1, RefinementRequest::ExhaustiveFiniteDomain { domain: &domain, checker: &checker });
        assert!(back.is_ok());
    }

    #[test]
    fn static_split_skips_shared_conjuncts() {
        let c1 = c("(w == 0) and (d > 1)", "g > 0");
        let c2 = c("(not (w == 0)) and (d > 1)", "g > 0");
        assert_eq!(static_part(&c1, &c2), vec![parse_formula("w == 0").unwrap()]);
    }
}
