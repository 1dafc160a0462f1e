//! Environment states, components, scenarios and the traces they generate.

mod coin;
mod component;
mod log;
mod rng;
mod scenario;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use coin::CoinScenario;
pub use component::{compose, Component, ComponentInterface, Composite, CompositionError, StepError, Wire};
pub use log::{read_log, write_log, LogError, LogRecord};
pub use rng::{default_workers, par_map, substream};
pub use scenario::{draw, run_trace, Sample, SceneDraw, Scenario, TraceError};

use crate::lang::TraceView;
use crate::num::Num;

/// One environment state. `terminal` marks the end-of-trace value.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvState {
    pub vars: BTreeMap<String, Num>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub terminal: bool,
}

impl EnvState {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (String, Num)>) -> Self {
        EnvState { vars: pairs.into_iter().collect(), terminal: false }
    }

    pub fn terminal() -> Self {
        EnvState { vars: BTreeMap::new(), terminal: true }
    }

    pub fn get(&self, var: &str) -> Option<&Num> {
        self.vars.get(var)
    }

    pub fn set(&mut self, var: impl Into<String>, value: Num) {
        self.vars.insert(var.into(), value);
    }
}

/// Port values of a component after one step.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ComponentValue(pub BTreeMap<String, Num>);

impl ComponentValue {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (String, Num)>) -> Self {
        ComponentValue(pairs.into_iter().collect())
    }

    pub fn get(&self, port: &str) -> Option<&Num> {
        self.0.get(port)
    }

    pub fn restrict(&self, ports: &std::collections::BTreeSet<String>) -> ComponentValue {
        ComponentValue(self.0.iter().filter(|(k, _)| ports.contains(*k)).map(|(k, v)| (k.clone(), v.clone())).collect())
    }
}

/// Where a trace came from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Provenance {
    pub scenario: String,
    pub seed: u64,
    pub stream: String,
    pub scene: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub steps: Vec<(EnvState, ComponentValue)>,
    pub provenance: Provenance,
}

impl Trace {
    pub fn initial(&self) -> &EnvState {
        &self.steps[0].0
    }
}

impl TraceView for Trace {
    fn len(&self) -> usize {
        self.steps.len()
    }

    fn lookup(&self, step: usize, var: &str) -> Option<&Num> {
        let (env, value) = self.steps.get(step)?;
        value.get(var).or_else(|| env.get(var))
    }
}

/// A trace view over a single environment state, for formulas that only read
/// scene variables.
pub struct InitialState<'a>(pub &'a EnvState);

impl TraceView for InitialState<'_> {
    fn len(&self) -> usize {
        1
    }

    fn lookup(&self, step: usize, var: &str) -> Option<&Num> {
        if step == 0 {
            self.0.get(var)
        } else {
            None
        }
    }
}
