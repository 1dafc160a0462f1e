use std::collections::{BTreeMap, BTreeSet};

use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::component::{Component, StepError};
use super::rng::substream;
use super::{ComponentValue, EnvState, Provenance, Trace};

/// Result of drawing an initial state.
pub enum SceneDraw<S> {
    Accepted { env: EnvState, sim: S },
    /// The draw violated a hard constraint; it is counted but never simulated.
    Rejected { env: EnvState },
}

/// A scene distribution plus a simulator.
pub trait Scenario: Send + Sync {
    /// Simulator state not visible in the trace.
    type Sim: Send;

    fn id(&self) -> &str;
    /// Digest of every parameter that affects the trace distribution.
    fn hash(&self) -> String;
    fn max_len(&self) -> usize;
    /// Variables fixed for the whole trace by the initial draw.
    fn scene_vars(&self) -> BTreeSet<String>;
    fn sample_scene(&self, rng: &mut ChaCha8Rng) -> SceneDraw<Self::Sim>;
    /// Next environment state, or a terminal state to end the trace.
    fn step(&self, env: &EnvState, value: &ComponentValue, sim: &mut Self::Sim, rng: &mut ChaCha8Rng) -> EnvState;
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("component `{0}` has unbound inputs {1:?}")]
    UnboundInputs(String, Vec<String>),
    #[error("step {step}: {source}")]
    Step { step: usize, source: StepError },
}

/// Runs the simulation loop from an accepted scene until the simulator
/// terminates or the scenario's length bound is reached. Terminal states are
/// not recorded.
pub fn run_trace<S: Scenario + ?Sized>(
    scenario: &S,
    component: &dyn Component,
    env: EnvState,
    mut sim: S::Sim,
    rng: &mut ChaCha8Rng,
    provenance: Provenance,
) -> Result<Trace, TraceError> {
    let unbound = &component.interface().inputs;
    if !unbound.is_empty() {
        return Err(TraceError::UnboundInputs(component.name().into(), unbound.iter().cloned().collect()));
    }
    let none = BTreeMap::new();
    let v0 = component.step(&env, &none, None).map_err(|source| TraceError::Step { step: 0, source })?;
    let mut steps = vec![(env, v0)];
    while steps.len() < scenario.max_len().max(1) {
        let (e, v) = steps.last().expect("non-empty");
        let next_env = scenario.step(e, v, &mut sim, rng);
        if next_env.terminal {
            break;
        }
        let next_v =
            component.step(&next_env, &none, Some(v)).map_err(|source| TraceError::Step { step: steps.len(), source })?;
        steps.push((next_env, next_v));
    }
    Ok(Trace { steps, provenance })
}

/// A single scene outcome.
pub enum Sample {
    Rejected { provenance: Provenance, env: EnvState },
    Trace(Trace),
}

/// Draws scene `index` of `stream` and simulates it if accepted.
pub fn draw<S: Scenario + ?Sized>(
    scenario: &S,
    component: &dyn Component,
    seed: u64,
    stream: &str,
    index: u64,
) -> Result<Sample, TraceError> {
    let mut rng = substream(seed, stream, index);
    let provenance = Provenance { scenario: scenario.id().into(), seed, stream: stream.into(), scene: index };
    match scenario.sample_scene(&mut rng) {
        SceneDraw::Rejected { env } => Ok(Sample::Rejected { provenance, env }),
        SceneDraw::Accepted { env, sim } => {
            run_trace(scenario, component, env, sim, &mut rng, provenance).map(Sample::Trace)
        }
    }
}
