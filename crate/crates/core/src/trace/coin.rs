//! A scenario with a known satisfaction probability, for calibration tests.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::component::{Component, ComponentInterface, StepError};
use super::scenario::{SceneDraw, Scenario};
use super::{ComponentValue, EnvState};
use crate::num::Num;

/// Each scene flips a coin `coin` with `P(coin = 1) = heads`. A fraction
/// `reject` of draws is rejected. Traces hold `coin` constant and count `t`.
#[derive(Debug, Clone)]
pub struct CoinScenario {
    pub heads: f64,
    pub reject: f64,
    pub len: usize,
}

impl CoinScenario {
    pub fn new(heads: f64) -> Self {
        CoinScenario { heads, reject: 0.0, len: 3 }
    }

    /// Pass-through component exposing the coin as port `seen`.
    pub fn observer() -> CoinObserver {
        CoinObserver { iface: ComponentInterface::new(&[], &[], &["seen"], &[]).expect("disjoint") }
    }
}

impl Scenario for CoinScenario {
    type Sim = ();

    fn id(&self) -> &str {
        "coin"
    }

    fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(format!("coin:{}:{}:{}", self.heads, self.reject, self.len));
        hex::encode(h.finalize())
    }

    fn max_len(&self) -> usize {
        self.len
    }

    fn scene_vars(&self) -> BTreeSet<String> {
        ["coin".to_string()].into()
    }

    fn sample_scene(&self, rng: &mut ChaCha8Rng) -> SceneDraw<()> {
        let rejected = rng.random::<f64>() < self.reject;
        let coin = i64::from(rng.random::<f64>() < self.heads);
        let env = EnvState::from_pairs([("coin".to_string(), Num::int(coin)), ("t".to_string(), Num::zero())]);
        if rejected {
            SceneDraw::Rejected { env }
        } else {
            SceneDraw::Accepted { env, sim: () }
        }
    }

    fn step(&self, env: &EnvState, _value: &ComponentValue, _sim: &mut (), _rng: &mut ChaCha8Rng) -> EnvState {
        let mut next = env.clone();
        let t = env.get("t").cloned().unwrap_or_default();
        next.set("t", &t + &Num::int(1));
        next
    }
}

pub struct CoinObserver {
    iface: ComponentInterface,
}

impl Component for CoinObserver {
    fn name(&self) -> &str {
        "observer"
    }

    fn interface(&self) -> &ComponentInterface {
        &self.iface
    }

    fn step(
        &self,
        env: &EnvState,
        _inputs: &BTreeMap<String, Num>,
        _prev: Option<&ComponentValue>,
    ) -> Result<ComponentValue, StepError> {
        let coin = env
            .get("coin")
            .cloned()
            .ok_or_else(|| StepError::MissingEnv { component: "observer".into(), var: "coin".into() })?;
        Ok(ComponentValue::from_pairs([("seen".to_string(), coin)]))
    }
}
