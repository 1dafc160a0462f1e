use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::lang::{eval_formula, Contract, TruthValue};
use crate::num::Num;
use crate::trace::{Component, ComponentValue, EnvState, Provenance, Trace};

/// A claim that `target` (a contract hash) holds on every trace, with a
/// checker-specific payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProofCertificate {
    pub id: String,
    pub target: String,
    pub checker: String,
    pub payload: serde_json::Value,
}

impl ProofCertificate {
    pub fn new(id: impl Into<String>, contract: &Contract, checker: impl Into<String>, payload: serde_json::Value) -> Self {
        ProofCertificate { id: id.into(), target: contract.hash(), checker: checker.into(), payload }
    }

    pub fn payload_hash(&self) -> String {
        hex::encode(Sha256::digest(self.payload.to_string().as_bytes()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CheckOutcome {
    /// The contract holds everywhere within `scope`.
    Accepted { scope: String },
    Rejected { reason: String, counterexample: Option<Trace> },
    /// The checker declined to decide (budget, malformed payload, crash).
    Refused { reason: String },
}

impl CheckOutcome {
    pub fn accepted(&self) -> bool {
        matches!(self, CheckOutcome::Accepted { .. })
    }
}

/// Decides whether a contract holds on all traces.
pub trait ProofChecker: Send + Sync {
    fn id(&self) -> &str;
    fn check(&self, cert: &ProofCertificate, contract: &Contract) -> CheckOutcome;
}

/// Finite grids for the exhaustive checker. Scene variables keep one value
/// along a trace; every other grid variable ranges freely at each step.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FiniteDomain {
    pub grids: BTreeMap<String, Vec<Num>>,
    #[serde(default)]
    pub scene_vars: BTreeSet<String>,
    pub max_len: usize,
}

impl FiniteDomain {
    pub fn new(max_len: usize) -> Self {
        FiniteDomain { max_len, ..Default::default() }
    }

    pub fn grid(mut self, var: &str, values: Vec<Num>) -> Self {
        self.grids.insert(var.to_string(), values);
        self
    }

    pub fn scene(mut self, var: &str, values: Vec<Num>) -> Self {
        self.scene_vars.insert(var.to_string());
        self.grid(var, values)
    }

    /// `lo, lo + step, ..., hi` in exact arithmetic.
    pub fn range(lo: &Num, hi: &Num, step: &Num) -> Vec<Num> {
        let mut out = Vec::new();
        let mut v = lo.clone();
        while v <= *hi {
            out.push(v.clone());
            v = &v + step;
        }
        out
    }

    /// Number of traces the domain spans, saturating.
    pub fn size(&self) -> u128 {
        let scene: u128 =
            self.scene_vars.iter().map(|v| self.grids.get(v).map_or(0, |g| g.len() as u128)).product();
        let per_step: u128 = self
            .grids
            .iter()
            .filter(|(k, _)| !self.scene_vars.contains(*k))
            .map(|(_, g)| g.len() as u128)
            .product();
        let mut total: u128 = 0;
        let mut layer: u128 = 1;
        for _ in 0..self.max_len {
            layer = layer.saturating_mul(per_step);
            total = total.saturating_add(layer);
        }
        scene.saturating_mul(total)
    }

    fn describe(&self) -> String {
        format!(
            "exhaustive over {} grid variables ({} fixed per trace), traces of length 1..={}, {} traces",
            self.grids.len(),
            self.scene_vars.len(),
            self.max_len,
            self.size()
        )
    }
}

/// Enumerates every trace of a [`FiniteDomain`] payload and evaluates
/// `A implies G` on each. With a component attached, grid variables form the
/// environment (and feed any same-named component inputs), and the
/// component's ports are computed by running it along the trace.
pub struct ExhaustiveChecker {
    id: String,
    component: Option<Arc<dyn Component>>,
    budget: u128,
}

impl ExhaustiveChecker {
    pub fn new(id: impl Into<String>) -> Self {
        ExhaustiveChecker { id: id.into(), component: None, budget: 5_000_000 }
    }

    pub fn with_component(mut self, component: Arc<dyn Component>) -> Self {
        self.component = Some(component);
        self
    }

    pub fn with_budget(mut self, budget: u128) -> Self {
        self.budget = budget;
        self
    }

    /// Checks a contract over a domain directly.
    pub fn check_domain(&self, domain: &FiniteDomain, contract: &Contract) -> CheckOutcome {
        if domain.max_len == 0 {
            return CheckOutcome::Refused { reason: "max_len must be at least 1".into() };
        }
        if let Some((var, _)) = domain.grids.iter().find(|(_, g)| g.is_empty()) {
            return CheckOutcome::Refused { reason: format!("empty grid for `{var}`") };
        }
        if let Some(v) = domain.scene_vars.iter().find(|v| !domain.grids.contains_key(*v)) {
            return CheckOutcome::Refused { reason: format!("scene variable `{v}` has no grid") };
        }
        let ports: BTreeSet<String> = self.component.as_ref().map(|c| c.interface().ports()).unwrap_or_default();
        if let Some(v) = contract.signature.iter().find(|v| !domain.grids.contains_key(*v) && !ports.contains(*v)) {
            return CheckOutcome::Refused { reason: format!("no grid for variable `{v}`") };
        }
        if let Some(c) = &self.component {
            if let Some(v) = c.interface().inputs.iter().find(|v| !domain.grids.contains_key(*v)) {
                return CheckOutcome::Refused { reason: format!("no grid for component input `{v}`") };
            }
        }
        let size = domain.size();
        if size > self.budget {
            return CheckOutcome::Refused { reason: format!("domain spans {size} traces, budget is {}", self.budget) };
        }

        let formula = contract.implication();
        let scene: Vec<(&String, &Vec<Num>)> =
            domain.grids.iter().filter(|(k, _)| domain.scene_vars.contains(*k)).collect();
        let dynamic: Vec<(&String, &Vec<Num>)> =
            domain.grids.iter().filter(|(k, _)| !domain.scene_vars.contains(*k)).collect();
        let provenance = Provenance { scenario: "exhaustive".into(), seed: 0, stream: self.id.clone(), scene: 0 };

        let mut scene_idx = vec![0usize; scene.len()];
        loop {
            let fixed: Vec<(String, Num)> =
                scene.iter().zip(&scene_idx).map(|((k, g), &i)| ((*k).clone(), g[i].clone())).collect();
            let mut search = Search {
                checker: self,
                dynamic: &dynamic,
                fixed: &fixed,
                formula: &formula,
                max_len: domain.max_len,
                trace: Trace { steps: Vec::new(), provenance: provenance.clone() },
            };
            if let Some(outcome) = search.extend() {
                return outcome;
            }
            if !advance(&mut scene_idx, scene.iter().map(|(_, g)| g.len())) {
                break;
            }
        }
        CheckOutcome::Accepted { scope: domain.describe() }
    }
}

/// Mixed-radix increment; false once every combination has been visited.
fn advance(idx: &mut [usize], radices: impl Iterator<Item = usize>) -> bool {
    for (slot, radix) in idx.iter_mut().zip(radices) {
        *slot += 1;
        if *slot < radix {
            return true;
        }
        *slot = 0;
    }
    false
}

struct Search<'a> {
    checker: &'a ExhaustiveChecker,
    dynamic: &'a [(&'a String, &'a Vec<Num>)],
    fixed: &'a [(String, Num)],
    formula: &'a crate::lang::Formula,
    max_len: usize,
    trace: Trace,
}

impl Search<'_> {
    /// Depth-first over trace prefixes; every prefix is itself a trace to check.
    fn extend(&mut self) -> Option<CheckOutcome> {
        if self.trace.steps.len() == self.max_len {
            return None;
        }
        let mut idx = vec![0usize; self.dynamic.len()];
        loop {
            let mut env = EnvState::from_pairs(self.fixed.iter().cloned());
            for ((k, g), &i) in self.dynamic.iter().zip(&idx) {
                env.set((*k).clone(), g[i].clone());
            }
            let value = match &self.checker.component {
                None => ComponentValue::default(),
                Some(c) => {
                    let inputs: BTreeMap<String, Num> = c
                        .interface()
                        .inputs
                        .iter()
                        .map(|p| (p.clone(), env.get(p).cloned().expect("checked above")))
                        .collect();
                    let prev = self.trace.steps.last().map(|(_, v)| v);
                    match c.step(&env, &inputs, prev) {
                        Ok(v) => v,
                        Err(e) => return Some(CheckOutcome::Refused { reason: format!("component step failed: {e}") }),
                    }
                }
            };
            self.trace.steps.push((env, value));
            if eval_formula(self.formula, &self.trace, 0) == TruthValue::False {
                return Some(CheckOutcome::Rejected {
                    reason: format!("counterexample of length {}", self.trace.steps.len()),
                    counterexample: Some(self.trace.clone()),
                });
            }
            if let Some(found) = self.extend() {
                return Some(found);
            }
            self.trace.steps.pop();
            if !advance(&mut idx, self.dynamic.iter().map(|(_, g)| g.len())) {
                return None;
            }
        }
    }
}

impl ProofChecker for ExhaustiveChecker {
    fn id(&self) -> &str {
        &self.id
    }

    fn check(&self, cert: &ProofCertificate, contract: &Contract) -> CheckOutcome {
        match serde_json::from_value::<FiniteDomain>(cert.payload.clone()) {
            Ok(domain) => self.check_domain(&domain, contract),
            Err(e) => CheckOutcome::Refused { reason: format!("payload is not a finite domain: {e}") },
        }
    }
}

/// Delegates to a subprocess. The process receives a JSON object with the
/// contract, its hash and the certificate on stdin; it accepts by exiting 0
/// with the contract hash as the first line of stdout.
pub struct ExternalChecker {
    id: String,
    program: String,
    args: Vec<String>,
    timeout: Duration,
}

impl ExternalChecker {
    pub fn new(id: impl Into<String>, program: impl Into<String>, args: Vec<String>, timeout: Duration) -> Self {
        ExternalChecker { id: id.into(), program: program.into(), args, timeout }
    }
}

impl ProofChecker for ExternalChecker {
    fn id(&self) -> &str {
        &self.id
    }

    fn check(&self, cert: &ProofCertificate, contract: &Contract) -> CheckOutcome {
        let hash = contract.hash();
        let request = serde_json::json!({ "contract": contract, "contract_hash": hash, "certificate": cert });
        let mut child = match Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
        {
            Ok(c) => c,
            Err(e) => return CheckOutcome::Refused { reason: format!("cannot start `{}`: {e}", self.program) },
        };
        if let Some(mut stdin) = child.stdin.take() {
            // A checker that exits without reading stdin closes the pipe; that is its answer.
            let _ = stdin.write_all(request.to_string().as_bytes());
        }
        let mut stdout = child.stdout.take().expect("piped");
        let reader = std::thread::spawn(move || {
            let mut s = String::new();
            let _ = stdout.read_to_string(&mut s);
            s
        });
        let start = Instant::now();
        let status = loop {
            match child.try_wait() {
                Ok(Some(status)) => break status,
                Ok(None) if start.elapsed() >= self.timeout => {
                    let _ = child.kill();
                    let _ = child.wait();
                    return CheckOutcome::Refused { reason: format!("timed out after {:?}", self.timeout) };
                }
                Ok(None) => std::thread::sleep(Duration::from_millis(5)),
                Err(e) => return CheckOutcome::Refused { reason: format!("wait failed: {e}") },
            }
        };
        let out = reader.join().unwrap_or_default();
        let echoed = out.lines().next().map(str::trim).unwrap_or("");
        if !status.success() {
            return CheckOutcome::Rejected { reason: format!("checker exited with {status}"), counterexample: None };
        }
        if echoed != hash {
            return CheckOutcome::Rejected { reason: "checker echoed a different contract hash".into(), counterexample: None };
        }
        CheckOutcome::Accepted { scope: format!("external checker `{}`", self.program) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dec(v: &str) -> Num {
        Num::from_decimal(v).unwrap()
    }

    #[test]
    fn rejects_irreflexive_atom() {
        let c = Contract::parse("bad", "true", "always (x > x)").unwrap();
        let d = FiniteDomain::new(2).grid("x", vec![dec("1")]);
        let out = ExhaustiveChecker::new("grid").check_domain(&d, &c);
        assert!(matches!(out, CheckOutcome::Rejected { counterexample: Some(_), .. }));
    }

    #[test]
    fn refuses_empty_grid_and_budget() {
        let c = Contract::parse("c", "true", "always (x >= 0)").unwrap();
        let empty = FiniteDomain::new(1).grid("x", vec![]);
        assert!(matches!(ExhaustiveChecker::new("g").check_domain(&empty, &c), CheckOutcome::Refused { .. }));
        let big = FiniteDomain::new(6).grid("x", FiniteDomain::range(&dec("0"), &dec("10"), &dec("1")));
        let out = ExhaustiveChecker::new("g").with_budget(1000).check_domain(&big, &c);
        assert!(matches!(out, CheckOutcome::Refused { .. }));
    }

    #[test]
    fn median_band_property() {
        // d1, d2 within 0.1 of t and d3 anywhere on the grid keep the median within 0.1.
        let c = Contract::parse(
            "median band",
            "always (((((t) - (0.1)) <= (d1)) and ((d1) <= ((t) + (0.1)))) and ((((t) - (0.1)) <= (d2)) and ((d2) <= ((t) + (0.1)))))",
            "always ((((t) - (0.1)) <= (max((min((d1), (d2))), (min((max((d1), (d2))), (d3)))))) and ((max((min((d1), (d2))), (min((max((d1), (d2))), (d3))))) <= ((t) + (0.1))))",
        )
        .unwrap();
        let grid = FiniteDomain::range(&dec("0"), &dec("0.6"), &dec("0.05"));
        let d = FiniteDomain::new(1)
            .grid("t", grid.clone())
            .grid("d1", grid.clone())
            .grid("d2", grid.clone())
            .grid("d3", grid);
        assert!(ExhaustiveChecker::new("grid").check_domain(&d, &c).accepted());
    }

    #[test]
    fn scene_variables_stay_fixed() {
        let c = Contract::parse("const", "true", "always ((w) == (next (w)))").unwrap();
        let scene = FiniteDomain::new(3).scene("w", vec![dec("1"), dec("2")]);
        assert!(ExhaustiveChecker::new("g").check_domain(&scene, &c).accepted());
        let free = FiniteDomain::new(3).grid("w", vec![dec("1"), dec("2")]);
        assert!(!ExhaustiveChecker::new("g").check_domain(&free, &c).accepted());
    }
}
