//! Evidence nodes and the three base verification procedures.

mod checkers;
mod testing;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use checkers::{
    CheckOutcome, ExhaustiveChecker, ExternalChecker, FiniteDomain, ProofCertificate, ProofChecker,
};
pub(crate) use testing::testing_source;
pub use testing::{sample_outcomes, verify_testing, Budget, SceneResult, TestConfig};

use crate::algebra::RefinementWitness;
use crate::lang::Contract;
use crate::stats::{ProbBound, StatsError, TestingOutcome};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EvidenceKind {
    Test,
    Proof,
    Assumption,
    Refined,
    Composed,
    Conjoined,
    StrongMerged,
    WeakMerged,
    WeakMergeTested,
}

/// Identifies the random substream a Test leaf consumed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestSource {
    pub scenario: String,
    pub scenario_hash: String,
    pub seed: u64,
    pub stream: String,
    pub budget: Budget,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub id: String,
    pub checker: String,
    pub payload_hash: String,
    pub accepted: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scope: Option<String>,
}

/// The weight `P(T |= A1)` used by the weak-merge mixture rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureWeight {
    pub p: f64,
    pub provenance: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<TestingOutcome>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<TestSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub justification: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<RefinementWitness>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<MixtureWeight>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
}

/// A node binding a contract to a probability bound and the rule that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub kind: EvidenceKind,
    pub component: String,
    pub contract: Contract,
    pub contract_hash: String,
    pub bound: ProbBound,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<Evidence>,
    #[serde(default)]
    pub meta: Metadata,
}

#[derive(Debug, Error)]
pub enum EvidenceError {
    #[error("all {0} samples were rejected")]
    AllRejected(u64),
    #[error("gave up after {draws} draws without reaching the budget")]
    BudgetUnreachable { draws: u64 },
    #[error("assumption needs a non-empty justification")]
    MissingJustification,
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("calibration failed: {0}")]
    Calibration(String),
    #[error("malformed evidence: {0}")]
    Malformed(String),
}

impl Evidence {
    pub fn new(kind: EvidenceKind, component: impl Into<String>, contract: Contract, bound: ProbBound) -> Self {
        let contract_hash = contract.hash();
        Evidence {
            kind,
            component: component.into(),
            contract,
            contract_hash,
            bound,
            children: Vec::new(),
            meta: Metadata::default(),
        }
    }

    /// Checks the per-kind shape rules recursively.
    pub fn validate(&self) -> Result<(), EvidenceError> {
        let bad = |msg: &str| Err(EvidenceError::Malformed(format!("{:?} node `{}`: {msg}", self.kind, self.component)));
        if !(0.0..=1.0).contains(&self.bound.p) || !(0.0..=1.0).contains(&self.bound.c) {
            return bad("bound outside [0, 1]");
        }
        if self.contract_hash != self.contract.hash() {
            return bad("contract hash does not match contract");
        }
        let arity = self.children.len();
        match self.kind {
            EvidenceKind::Test => {
                if self.meta.outcome.is_none() || self.meta.source.is_none() {
                    return bad("missing testing outcome or source");
                }
                if arity != 0 {
                    return bad("test leaves have no children");
                }
            }
            EvidenceKind::Proof => {
                if self.meta.certificate.is_none() {
                    return bad("missing certificate");
                }
                let b = self.bound;
                if b != ProbBound::CERTAIN && b != ProbBound::REFUTED {
                    return bad("proof bound must be (1, 1) or (0, 1)");
                }
            }
            EvidenceKind::Assumption => {
                if self.meta.justification.as_deref().unwrap_or("").is_empty() {
                    return bad("missing justification");
                }
            }
            EvidenceKind::Refined => {
                if arity != 1 || self.meta.witness.is_none() {
                    return bad("refinement needs one child and a witness");
                }
                if self.bound != self.children[0].bound {
                    return bad("refinement must carry the child bound unchanged");
                }
            }
            EvidenceKind::Composed
            | EvidenceKind::Conjoined
            | EvidenceKind::StrongMerged
            | EvidenceKind::WeakMerged => {
                if arity != 2 {
                    return bad("combination needs two children");
                }
                if self.bound.c != self.children[0].bound.c * self.children[1].bound.c {
                    return bad("confidence must be the product of the children's");
                }
                if self.kind == EvidenceKind::WeakMerged && self.meta.weight.is_none() {
                    return bad("weak merge needs a mixture weight");
                }
            }
            EvidenceKind::WeakMergeTested => {
                if !(1..=2).contains(&arity) || self.meta.outcome.is_none() {
                    return bad("needs a proof child, a test child and a testing outcome");
                }
                if self.children[0].kind != EvidenceKind::Proof {
                    return bad("first child must be the proof");
                }
            }
        }
        self.children.iter().try_for_each(Evidence::validate)
    }

    /// Pre-order traversal.
    pub fn walk(&self) -> Vec<&Evidence> {
        let mut out = vec![self];
        for c in &self.children {
            out.extend(c.walk());
        }
        out
    }
}

/// Wraps an evidence tree for storage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceDocument {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
    pub root: Evidence,
}

pub fn export_json(root: &Evidence, config: Option<serde_json::Value>) -> String {
    let doc = EvidenceDocument { schema_version: SCHEMA_VERSION, config, root: root.clone() };
    let mut s = serde_json::to_string_pretty(&doc).expect("evidence serializes");
    s.push('\n');
    s
}

pub fn import_json(text: &str) -> Result<EvidenceDocument, EvidenceError> {
    let doc: EvidenceDocument = serde_json::from_str(text).map_err(|e| EvidenceError::Malformed(e.to_string()))?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(EvidenceError::Malformed(format!("unsupported schema version {}", doc.schema_version)));
    }
    doc.root.validate()?;
    Ok(doc)
}

/// Evidence from a proof certificate: `(1, 1)` if the checker accepts the
/// certificate for this contract, `(0, 1)` otherwise.
pub fn verify_proof(
    component: &str,
    cert: &ProofCertificate,
    checker: &dyn ProofChecker,
    contract: &Contract,
) -> Evidence {
    let mut diagnostics = Vec::new();
    let outcome = if cert.target != contract.hash() {
        CheckOutcome::Rejected { reason: "certificate targets a different contract".into(), counterexample: None }
    } else if cert.checker != checker.id() {
        CheckOutcome::Rejected {
            reason: format!("certificate is for checker `{}`, not `{}`", cert.checker, checker.id()),
            counterexample: None,
        }
    } else {
        match std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| checker.check(cert, contract))) {
            Ok(o) => o,
            Err(_) => CheckOutcome::Refused { reason: format!("checker `{}` crashed", checker.id()) },
        }
    };
    let (accepted, scope) = match &outcome {
        CheckOutcome::Accepted { scope } => (true, Some(scope.clone())),
        CheckOutcome::Rejected { reason, .. } => {
            diagnostics.push(format!("rejected: {reason}"));
            (false, None)
        }
        CheckOutcome::Refused { reason } => {
            diagnostics.push(format!("refused: {reason}"));
            (false, None)
        }
    };
    let bound = if accepted { ProbBound::CERTAIN } else { ProbBound::REFUTED };
    let mut e = Evidence::new(EvidenceKind::Proof, component, contract.clone(), bound);
    e.meta.certificate = Some(CertificateRecord {
        id: cert.id.clone(),
        checker: checker.id().to_string(),
        payload_hash: cert.payload_hash(),
        accepted,
        scope,
    });
    e.meta.diagnostics = diagnostics;
    e
}

/// Evidence that is taken on trust at the stated bound.
pub fn verify_assumption(
    component: &str,
    contract: &Contract,
    p: f64,
    c: f64,
    justification: &str,
) -> Result<Evidence, EvidenceError> {
    if justification.trim().is_empty() {
        return Err(EvidenceError::MissingJustification);
    }
    let bound = ProbBound::new(p, c)?;
    let mut e = Evidence::new(EvidenceKind::Assumption, component, contract.clone(), bound);
    e.meta.justification = Some(justification.to_string());
    Ok(e)
}
