//! Highway scene distribution and plant dynamics.

use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::components::SensorParams;
use super::model;
use super::vars;
use crate::num::Num;
use crate::trace::{ComponentValue, EnvState, SceneDraw, Scenario};

/// Scene distribution and plant parameters. Lengths are metres, speeds
/// metres per step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AebConfig {
    /// Relative weights of clear, cloudy, rain and snow.
    pub weather_weights: [f64; 4],
    pub width_min: f64,
    pub width_max: f64,
    pub lead_dist_min: f64,
    pub lead_dist_max: f64,
    /// Scenes must start with `lead_dist > buffer_dist`.
    pub buffer_dist: f64,
    /// Probability per step of starting a sustained hard-brake phase.
    pub hard_brake_prob: f64,
    pub hard_brake_min: u32,
    pub hard_brake_max: u32,
    pub steps: usize,
    pub sensors: SensorParams,
}

impl Default for AebConfig {
    fn default() -> Self {
        AebConfig {
            weather_weights: [1.0; 4],
            width_min: 1.2,
            width_max: 3.2,
            lead_dist_min: 4.0,
            lead_dist_max: 50.0,
            buffer_dist: 10.0,
            hard_brake_prob: 0.05,
            hard_brake_min: 3,
            hard_brake_max: 6,
            steps: 100,
            sensors: SensorParams::default(),
        }
    }
}

pub(super) fn mm(metres: f64) -> i64 {
    (metres * 1_000.0).round() as i64
}

/// Sensor noise for one step, in millimetres or per mille.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(super) struct Noise {
    pub radar_u: i64,
    pub radar_err: i64,
    pub radar_offset: i64,
    pub laser_u: i64,
    pub laser_err: i64,
    pub laser_frac: i64,
    pub camera_err: i64,
}

impl Noise {
    fn write(&self, env: &mut EnvState) {
        for (var, v) in [
            (vars::RADAR_U, self.radar_u),
            (vars::RADAR_ERR, self.radar_err),
            (vars::RADAR_OFFSET, self.radar_offset),
            (vars::LASER_U, self.laser_u),
            (vars::LASER_ERR, self.laser_err),
            (vars::LASER_FRAC, self.laser_frac),
            (vars::CAMERA_ERR, self.camera_err),
        ] {
            env.set(var, Num::milli(v));
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(super) struct SceneStart {
    pub weather: i64,
    pub width: i64,
    pub lead_dist: i64,
    pub lead_speed: i64,
    pub rejected: bool,
}

/// Lead-car state carried between steps.
#[derive(Debug, Clone, Default)]
pub struct LeadPolicy {
    hard_brake_left: u32,
}

pub struct AebScenario {
    pub config: AebConfig,
    camera: Normal<f64>,
}

impl AebScenario {
    pub fn new(config: AebConfig) -> Self {
        let camera = Normal::new(0.0, config.sensors.camera_sigma * 1_000.0).expect("finite camera sigma");
        AebScenario { config, camera }
    }

    fn weather(&self, rng: &mut ChaCha8Rng) -> i64 {
        let w = &self.config.weather_weights;
        let mut x = rng.random::<f64>() * w.iter().sum::<f64>();
        for (i, wi) in w.iter().enumerate() {
            if x < *wi {
                return i as i64;
            }
            x -= wi;
        }
        3
    }

    /// Draws every sensor noise variable for one step.
    pub(super) fn draw_noise(&self, rng: &mut ChaCha8Rng) -> Noise {
        Noise {
            radar_u: rng.random_range(0..1_000),
            radar_err: rng.random_range(-model::BAND..=model::BAND),
            radar_offset: rng.random_range(1_000..=10_000),
            laser_u: rng.random_range(0..1_000),
            laser_err: rng.random_range(-model::BAND..=model::BAND),
            laser_frac: rng.random_range(0..1_000),
            camera_err: self.camera.sample(rng).round() as i64,
        }
    }

    /// Draws the initial scene: weather, width, gap and lead speed.
    pub(super) fn draw_scene(&self, rng: &mut ChaCha8Rng) -> SceneStart {
        let c = &self.config;
        let weather = self.weather(rng);
        let width = rng.random_range(mm(c.width_min)..=mm(c.width_max));
        let lead_dist = rng.random_range(mm(c.lead_dist_min) / 100..=mm(c.lead_dist_max) / 100) * 100;
        let lead_speed = rng.random_range(0..=model::MAX_SPEED / 100) * 100;
        SceneStart { weather, width, lead_dist, lead_speed, rejected: lead_dist <= mm(c.buffer_dist) }
    }

    pub(super) fn lead_delta(&self, policy: &mut LeadPolicy, rng: &mut ChaCha8Rng) -> i64 {
        if policy.hard_brake_left == 0 && rng.random::<f64>() < self.config.hard_brake_prob {
            policy.hard_brake_left = rng.random_range(self.config.hard_brake_min..=self.config.hard_brake_max);
        }
        if policy.hard_brake_left > 0 {
            policy.hard_brake_left -= 1;
            return -model::MAX_DECEL;
        }
        [-model::MAX_DECEL, 0, model::MAX_ACCEL][rng.random_range(0..3)]
    }
}

fn read(env: &EnvState, var: &str) -> i64 {
    env.get(var).and_then(Num::to_milli).unwrap_or_else(|| panic!("scenario state lacks `{var}`"))
}

impl Scenario for AebScenario {
    type Sim = LeadPolicy;

    fn id(&self) -> &str {
        "aeb-highway"
    }

    fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(&self.config).expect("config serializes"));
        hex::encode(h.finalize())
    }

    fn max_len(&self) -> usize {
        self.config.steps
    }

    fn scene_vars(&self) -> BTreeSet<String> {
        [vars::WEATHER, vars::WIDTH, vars::BUFFER_DIST, vars::BEHIND_CAR].iter().map(|s| s.to_string()).collect()
    }

    fn sample_scene(&self, rng: &mut ChaCha8Rng) -> SceneDraw<LeadPolicy> {
        let start = self.draw_scene(rng);
        let mut env = EnvState::from_pairs([
            (vars::WEATHER.to_string(), Num::int(start.weather)),
            (vars::WIDTH.to_string(), Num::milli(start.width)),
            (vars::BUFFER_DIST.to_string(), Num::milli(mm(self.config.buffer_dist))),
            (vars::BEHIND_CAR.to_string(), Num::int(1)),
            (vars::LEAD_DIST.to_string(), Num::milli(start.lead_dist)),
            (vars::EGO_SPEED.to_string(), Num::zero()),
            (vars::LEAD_SPEED.to_string(), Num::milli(start.lead_speed)),
            (vars::RELATIVE_SPEED.to_string(), Num::milli(-start.lead_speed)),
        ]);
        self.draw_noise(rng).write(&mut env);
        if start.rejected {
            SceneDraw::Rejected { env }
        } else {
            SceneDraw::Accepted { env, sim: LeadPolicy::default() }
        }
    }

    fn step(&self, env: &EnvState, value: &ComponentValue, sim: &mut LeadPolicy, rng: &mut ChaCha8Rng) -> EnvState {
        let ego = read(env, vars::EGO_SPEED);
        let lead = read(env, vars::LEAD_SPEED);
        let dist = read(env, vars::LEAD_DIST);
        let throttle = value.get("throttle").and_then(Num::to_milli).expect("car publishes a throttle");
        let ego_next = model::actuator(throttle, ego);
        let lead_next = (lead + self.lead_delta(sim, rng)).clamp(0, model::MAX_SPEED);
        let mut next = env.clone();
        next.set(vars::LEAD_DIST, Num::milli(dist - (ego - lead)));
        next.set(vars::EGO_SPEED, Num::milli(ego_next));
        next.set(vars::LEAD_SPEED, Num::milli(lead_next));
        next.set(vars::RELATIVE_SPEED, Num::milli(ego_next - lead_next));
        self.draw_noise(rng).write(&mut next);
        next
    }
}
