use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{ComponentValue, EnvState};
use crate::num::Num;

/// Port names of a component, grouped by role.
///
/// Sensors read the environment, actions are consumed by the simulator,
/// inputs arrive from sibling components, outputs feed siblings.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentInterface {
    pub inputs: BTreeSet<String>,
    pub outputs: BTreeSet<String>,
    pub sensors: BTreeSet<String>,
    pub actions: BTreeSet<String>,
}

fn names(ports: &[&str]) -> BTreeSet<String> {
    ports.iter().map(|p| p.to_string()).collect()
}

impl ComponentInterface {
    pub fn new(inputs: &[&str], outputs: &[&str], sensors: &[&str], actions: &[&str]) -> Result<Self, CompositionError> {
        let iface = ComponentInterface {
            inputs: names(inputs),
            outputs: names(outputs),
            sensors: names(sensors),
            actions: names(actions),
        };
        iface.check_disjoint()?;
        Ok(iface)
    }

    fn check_disjoint(&self) -> Result<(), CompositionError> {
        let groups = [&self.inputs, &self.outputs, &self.sensors, &self.actions];
        let mut seen = BTreeSet::new();
        for group in groups {
            for port in group {
                if !seen.insert(port) {
                    return Err(CompositionError::OverlappingRoles(port.clone()));
                }
            }
        }
        Ok(())
    }

    /// Ports this component writes during a step.
    pub fn produced(&self) -> impl Iterator<Item = &String> {
        self.outputs.iter().chain(&self.sensors).chain(&self.actions)
    }

    /// Every port that appears in the component's value.
    pub fn ports(&self) -> BTreeSet<String> {
        self.inputs.iter().chain(self.produced()).cloned().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompositionError {
    #[error("port `{0}` appears in more than one role")]
    OverlappingRoles(String),
    #[error("wire references child {0}, but only {1} children exist")]
    NoSuchChild(usize, usize),
    #[error("child `{child}` produces no port named `{port}`")]
    NoSuchOutput { child: String, port: String },
    #[error("child `{child}` has no input named `{port}`")]
    NoSuchInput { child: String, port: String },
    #[error("input `{port}` of child `{child}` is wired more than once")]
    DoubleWired { child: String, port: String },
    #[error("port `{0}` is produced by more than one child")]
    PortClash(String),
    #[error("wiring contains a cycle through `{0}`")]
    Cycle(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("component `{component}` is missing input `{port}`")]
    MissingInput { component: String, port: String },
    #[error("component `{component}` cannot read environment variable `{var}`")]
    MissingEnv { component: String, var: String },
    #[error("component `{component}`: {message}")]
    Failed { component: String, message: String },
}

/// A deterministic step function `v' = M(e, v)` with a declared interface.
pub trait Component: Send + Sync {
    fn name(&self) -> &str;
    fn interface(&self) -> &ComponentInterface;
    /// `prev` is `None` on the first step of a trace.
    fn step(
        &self,
        env: &EnvState,
        inputs: &BTreeMap<String, Num>,
        prev: Option<&ComponentValue>,
    ) -> Result<ComponentValue, StepError>;
}

/// Connects a produced port of one child to the same-named input of another.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Wire {
    pub from: usize,
    pub to: usize,
    pub port: String,
}

impl Wire {
    pub fn new(from: usize, to: usize, port: impl Into<String>) -> Self {
        Wire { from, to, port: port.into() }
    }
}

/// A component built from children; its value is the union of theirs.
pub struct Composite {
    name: String,
    interface: ComponentInterface,
    children: Vec<Arc<dyn Component>>,
    child_ports: Vec<BTreeSet<String>>,
    wires: Vec<Wire>,
    order: Vec<usize>,
}

/// Wires `children` together. Unwired child inputs become inputs of the result.
pub fn compose(
    name: impl Into<String>,
    children: Vec<Arc<dyn Component>>,
    wires: Vec<Wire>,
) -> Result<Composite, CompositionError> {
    let n = children.len();
    let mut produced_by: BTreeMap<&String, usize> = BTreeMap::new();
    for (i, child) in children.iter().enumerate() {
        for port in child.interface().produced() {
            if produced_by.insert(port, i).is_some() {
                return Err(CompositionError::PortClash(port.clone()));
            }
        }
    }
    let mut wired: BTreeSet<(usize, &str)> = BTreeSet::new();
    for w in &wires {
        if w.from >= n || w.to >= n {
            return Err(CompositionError::NoSuchChild(w.from.max(w.to), n));
        }
        let src = children[w.from].interface();
        if !src.produced().any(|p| p == &w.port) {
            return Err(CompositionError::NoSuchOutput { child: children[w.from].name().into(), port: w.port.clone() });
        }
        if !children[w.to].interface().inputs.contains(&w.port) {
            return Err(CompositionError::NoSuchInput { child: children[w.to].name().into(), port: w.port.clone() });
        }
        if !wired.insert((w.to, w.port.as_str())) {
            return Err(CompositionError::DoubleWired { child: children[w.to].name().into(), port: w.port.clone() });
        }
    }
    let order = topological_order(&children, &wires)?;

    let mut interface = ComponentInterface::default();
    for (i, child) in children.iter().enumerate() {
        let ci = child.interface();
        for port in &ci.inputs {
            if !wired.contains(&(i, port.as_str())) {
                if produced_by.contains_key(port) {
                    return Err(CompositionError::PortClash(port.clone()));
                }
                interface.inputs.insert(port.clone());
            }
        }
        interface.outputs.extend(ci.outputs.iter().cloned());
        interface.sensors.extend(ci.sensors.iter().cloned());
        interface.actions.extend(ci.actions.iter().cloned());
    }
    let child_ports = children.iter().map(|c| c.interface().ports()).collect();
    Ok(Composite { name: name.into(), interface, children, child_ports, wires, order })
}

fn topological_order(children: &[Arc<dyn Component>], wires: &[Wire]) -> Result<Vec<usize>, CompositionError> {
    let n = children.len();
    let mut indegree = vec![0usize; n];
    for w in wires {
        if w.from != w.to {
            indegree[w.to] += 1;
        } else {
            return Err(CompositionError::Cycle(children[w.from].name().into()));
        }
    }
    let mut ready: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    ready.reverse();
    let mut order = Vec::with_capacity(n);
    while let Some(i) = ready.pop() {
        order.push(i);
        let mut released = Vec::new();
        for w in wires.iter().filter(|w| w.from == i) {
            indegree[w.to] -= 1;
            if indegree[w.to] == 0 {
                released.push(w.to);
            }
        }
        released.sort_unstable_by(|a, b| b.cmp(a));
        ready.extend(released);
    }
    if order.len() < n {
        let stuck = (0..n).find(|&i| indegree[i] > 0).unwrap_or(0);
        return Err(CompositionError::Cycle(children[stuck].name().into()));
    }
    Ok(order)
}

impl Composite {
    pub fn children(&self) -> &[Arc<dyn Component>] {
        &self.children
    }

    pub fn wires(&self) -> &[Wire] {
        &self.wires
    }
}

impl Component for Composite {
    fn name(&self) -> &str {
        &self.name
    }

    fn interface(&self) -> &ComponentInterface {
        &self.interface
    }

    fn step(
        &self,
        env: &EnvState,
        inputs: &BTreeMap<String, Num>,
        prev: Option<&ComponentValue>,
    ) -> Result<ComponentValue, StepError> {
        let mut value = ComponentValue::default();
        for &i in &self.order {
            let child = &self.children[i];
            let mut child_inputs = BTreeMap::new();
            for port in &child.interface().inputs {
                let fed = self.wires.iter().find(|w| w.to == i && &w.port == port);
                let v = match fed {
                    Some(_) => value.0.get(port),
                    None => inputs.get(port),
                };
                match v {
                    Some(v) => {
                        child_inputs.insert(port.clone(), v.clone());
                    }
                    None => {
                        return Err(StepError::MissingInput { component: child.name().into(), port: port.clone() })
                    }
                }
            }
            let child_prev = prev.map(|p| p.restrict(&self.child_ports[i]));
            let out = child.step(env, &child_inputs, child_prev.as_ref())?;
            value.0.extend(out.0);
        }
        Ok(value)
    }
}
