//! Campaign spec files.
//!
//! A spec names a scenario, optional extra contracts, and a list of evidence
//! nodes. Leaf nodes are tests, proofs and assumptions; inner nodes apply an
//! operator to earlier nodes by name. `root` picks the node that is reported.
//!
//! ```toml
//! name = "example"
//! scenario = "aeb-highway"
//! seed = 7
//! root = "perception"
//!
//! [[evidence]]
//! name = "perception"
//! kind = "test"
//! contract = "perception"
//! samples = 500
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use pcv_core::aeb::{AebConfig, Catalog};
use pcv_core::Contract;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const NAIVE: &str = include_str!("../specs/aeb_naive.toml");
pub const OPTIMIZED: &str = include_str!("../specs/aeb_optimized.toml");

/// Names accepted by `certificate = ...` on proof and weak-merge nodes.
pub const CERTIFICATES: [&str; 5] = ["perception_known", "speed", "filter", "brakes", "keeps_distance"];
/// Names accepted by `domain = ...` on refine nodes.
pub const DOMAINS: [&str; 2] = ["control", "perception"];
pub const SYSTEMS: [&str; 1] = ["car"];

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("invalid spec: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignSpec {
    pub name: String,
    #[serde(default = "default_scenario")]
    pub scenario: String,
    /// TOML file with scenario parameters, relative to the campaign file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario_config: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario_params: Option<AebConfig>,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    pub root: String,
    /// Exit status 3 when the root bound falls below this.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub floor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, rename = "contract", skip_serializing_if = "Vec::is_empty")]
    pub contracts: Vec<ContractSpec>,
    #[serde(rename = "evidence")]
    pub evidence: Vec<EvidenceSpec>,
}

fn default_scenario() -> String {
    "aeb-highway".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractSpec {
    pub name: String,
    #[serde(default = "truth")]
    pub assumptions: String,
    pub guarantees: String,
}

fn truth() -> String {
    "true".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceSpec {
    pub name: String,
    /// Component name shown in the assurance case.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(flatten)]
    pub rule: Rule,
}

fn default_confidence() -> f64 {
    0.999
}

fn default_system() -> String {
    "car".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Rule {
    Test {
        contract: String,
        #[serde(default = "default_system")]
        system: String,
        samples: u64,
        #[serde(default = "default_confidence")]
        confidence: f64,
        stream: String,
    },
    WeakMergeTest {
        certificate: String,
        /// Contract tested on the region the certificate does not cover.
        contract: String,
        #[serde(default = "default_system")]
        system: String,
        samples: u64,
        #[serde(default = "default_confidence")]
        confidence: f64,
        stream: String,
    },
    Proof {
        certificate: String,
        contract: String,
    },
    Assumption {
        contract: String,
        p: f64,
        c: f64,
        justification: String,
    },
    Compose {
        operands: Vec<String>,
    },
    Conjoin {
        operands: Vec<String>,
    },
    StrongMerge {
        operands: Vec<String>,
    },
    WeakMerge {
        operands: Vec<String>,
        weight: f64,
        weight_provenance: String,
    },
    Refine {
        operand: String,
        contract: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        domain: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        certificate: Option<String>,
    },
}

impl Rule {
    pub fn operands(&self) -> Vec<&str> {
        match self {
            Rule::Compose { operands }
            | Rule::Conjoin { operands }
            | Rule::StrongMerge { operands }
            | Rule::WeakMerge { operands, .. } => operands.iter().map(String::as_str).collect(),
            Rule::Refine { operand, .. } => vec![operand.as_str()],
            _ => Vec::new(),
        }
    }

    fn contract(&self) -> Option<&str> {
        match self {
            Rule::Test { contract, .. }
            | Rule::WeakMergeTest { contract, .. }
            | Rule::Proof { contract, .. }
            | Rule::Assumption { contract, .. }
            | Rule::Refine { contract, .. } => Some(contract),
            _ => None,
        }
    }
}

/// Overrides from the command line; they beat file values.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub samples: Option<u64>,
    pub confidence: Option<f64>,
    pub workers: Option<usize>,
    pub output: Option<PathBuf>,
}

impl CampaignSpec {
    pub fn parse(text: &str, origin: &str) -> Result<Self, SpecError> {
        toml::from_str(text).map_err(|e| SpecError::Parse { path: origin.into(), message: e.to_string() })
    }

    /// Loads a spec from a path, or a bundled one from `builtin:aeb-naive` or
    /// `builtin:aeb-optimized`.
    pub fn load(path: &str) -> Result<Self, SpecError> {
        let mut spec = match path {
            "builtin:aeb-naive" => Self::parse(NAIVE, path)?,
            "builtin:aeb-optimized" => Self::parse(OPTIMIZED, path)?,
            _ => {
                let text =
                    std::fs::read_to_string(path).map_err(|source| SpecError::Io { path: path.into(), source })?;
                let mut spec = Self::parse(&text, path)?;
                let base = Path::new(path).parent().unwrap_or(Path::new(""));
                if let Some(rel) = spec.scenario_config.take() {
                    spec.scenario_config = Some(base.join(rel));
                }
                spec
            }
        };
        spec.resolve_scenario()?;
        Ok(spec)
    }

    /// Reads `scenario_config` into `scenario_params`.
    fn resolve_scenario(&mut self) -> Result<(), SpecError> {
        if let Some(path) = self.scenario_config.take() {
            if self.scenario_params.is_some() {
                return Err(SpecError::Invalid("give scenario_config or scenario_params, not both".into()));
            }
            let shown = path.display().to_string();
            let text = std::fs::read_to_string(&path).map_err(|source| SpecError::Io { path: shown.clone(), source })?;
            let config = toml::from_str(&text).map_err(|e| SpecError::Parse { path: shown, message: e.to_string() })?;
            self.scenario_params = Some(config);
        }
        Ok(())
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(w) = o.workers {
            self.workers = Some(w);
        }
        if let Some(out) = &o.output {
            self.output = Some(out.clone());
        }
        for e in &mut self.evidence {
            if let Rule::Test { samples, confidence, .. } | Rule::WeakMergeTest { samples, confidence, .. } = &mut e.rule
            {
                if let Some(n) = o.samples {
                    *samples = n;
                }
                if let Some(c) = o.confidence {
                    *confidence = c;
                }
            }
        }
    }

    pub fn scenario_config(&self) -> AebConfig {
        self.scenario_params.clone().unwrap_or_default()
    }

    /// Catalog contracts plus the campaign's own, by name.
    pub fn contracts(&self) -> Result<BTreeMap<String, Contract>, SpecError> {
        let cat = Catalog::build();
        let mut out: BTreeMap<String, Contract> = [
            ("radar", &cat.radar),
            ("laser", &cat.laser),
            ("median", &cat.median),
            ("perception_known", &cat.perception_known),
            ("perception_unknown", &cat.perception_unknown),
            ("perception", &cat.perception),
            ("speed", &cat.speed),
            ("filter", &cat.filter),
            ("brakes", &cat.brakes),
            ("control", &cat.control),
            ("actuator", &cat.actuator),
            ("keeps_distance", &cat.keeps_distance),
        ]
        .into_iter()
        .map(|(k, c)| (k.to_string(), c.clone()))
        .collect();
        for c in &self.contracts {
            let parsed = Contract::parse(&c.name, &c.assumptions, &c.guarantees)
                .map_err(|e| SpecError::Invalid(format!("contract `{}`: {e}", c.name)))?;
            if out.insert(c.name.clone(), parsed).is_some() {
                return Err(SpecError::Invalid(format!("contract `{}` is defined twice", c.name)));
            }
        }
        Ok(out)
    }

    /// Checks names, references, and numeric ranges.
    pub fn validate(&self) -> Result<(), SpecError> {
        let bad = |m: String| Err(SpecError::Invalid(m));
        if self.scenario != "aeb-highway" {
            return bad(format!("unknown scenario `{}`", self.scenario));
        }
        let contracts = self.contracts()?;
        let mut names = BTreeSet::new();
        for e in &self.evidence {
            if !names.insert(e.name.as_str()) {
                return bad(format!("evidence `{}` is defined twice", e.name));
            }
        }
        if !names.contains(self.root.as_str()) {
            return bad(format!("root refers to unknown evidence `{}`", self.root));
        }
        if let Some(f) = self.floor {
            if !(0.0..=1.0).contains(&f) {
                return bad(format!("floor {f} is outside [0, 1]"));
            }
        }
        for e in &self.evidence {
            for r in e.rule.operands() {
                if !names.contains(r) {
                    return bad(format!("evidence `{}` refers to unknown evidence `{r}`", e.name));
                }
            }
            if let Some(c) = e.rule.contract() {
                if !contracts.contains_key(c) {
                    return bad(format!("evidence `{}` refers to unknown contract `{c}`", e.name));
                }
            }
            match &e.rule {
                Rule::Test { system, samples, confidence, .. }
                | Rule::WeakMergeTest { system, samples, confidence, .. } => {
                    if !SYSTEMS.contains(&system.as_str()) {
                        return bad(format!("evidence `{}`: unknown system `{system}`", e.name));
                    }
                    if *samples == 0 {
                        return bad(format!("evidence `{}`: samples must be positive", e.name));
                    }
                    if !(*confidence > 0.0 && *confidence < 1.0) {
                        return bad(format!("evidence `{}`: confidence {confidence} is outside (0, 1)", e.name));
                    }
                }
                Rule::Assumption { p, c, .. } if !((0.0..=1.0).contains(p) && (0.0..=1.0).contains(c)) => {
                    return bad(format!("evidence `{}`: p and c must lie in [0, 1]", e.name));
                }
                Rule::Compose { operands } | Rule::Conjoin { operands } | Rule::StrongMerge { operands }
                    if operands.len() < 2 =>
                {
                    return bad(format!("evidence `{}` needs at least two operands", e.name));
                }
                Rule::WeakMerge { operands, .. } if operands.len() != 2 => {
                    return bad(format!("evidence `{}` needs exactly two operands", e.name));
                }
                Rule::Refine { domain: Some(_), certificate: Some(_), .. } => {
                    return bad(format!("evidence `{}`: give a domain or a certificate, not both", e.name));
                }
                Rule::Refine { domain: Some(d), .. } if !DOMAINS.contains(&d.as_str()) => {
                    return bad(format!("evidence `{}`: unknown domain `{d}`", e.name));
                }
                _ => {}
            }
            let cert = match &e.rule {
                Rule::Proof { certificate, .. } | Rule::WeakMergeTest { certificate, .. } => Some(certificate),
                Rule::Refine { certificate, .. } => certificate.as_ref(),
                _ => None,
            };
            if let Some(c) = cert {
                if !CERTIFICATES.contains(&c.as_str()) {
                    return bad(format!("evidence `{}`: unknown certificate `{c}`", e.name));
                }
            }
        }
        self.check_acyclic()
    }

    fn check_acyclic(&self) -> Result<(), SpecError> {
        let by_name: BTreeMap<&str, &EvidenceSpec> = self.evidence.iter().map(|e| (e.name.as_str(), e)).collect();
        // 0 = unseen, 1 = on the stack, 2 = done
        let mut state: BTreeMap<&str, u8> = BTreeMap::new();
        fn visit<'a>(
            n: &'a str,
            by_name: &BTreeMap<&'a str, &'a EvidenceSpec>,
            state: &mut BTreeMap<&'a str, u8>,
        ) -> Result<(), SpecError> {
            match state.get(n) {
                Some(2) => return Ok(()),
                Some(1) => return Err(SpecError::Invalid(format!("evidence `{n}` depends on itself"))),
                _ => {}
            }
            state.insert(n, 1);
            for r in by_name[n].rule.operands() {
                visit(r, by_name, state)?;
            }
            state.insert(n, 2);
            Ok(())
        }
        for e in &self.evidence {
            visit(&e.name, &by_name, &mut state)?;
        }
        Ok(())
    }
}
