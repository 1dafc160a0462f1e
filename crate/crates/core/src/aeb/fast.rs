//! Integer-only replay of the closed loop, consuming the same random draws
//! as [`AebScenario`] driving [`car`](super::car).

use super::model;
use super::scenario::{AebScenario, LeadPolicy, Noise};
use crate::trace::substream;

/// Summary of one simulated scene.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FastEpisode {
    pub rejected: bool,
    pub known_region: bool,
    pub steps: usize,
    /// Smallest `lead_dist` over the episode, in mm.
    pub closest: i64,
    /// Whether the fused distance stayed within the sensor band at every step.
    pub perception_in_band: bool,
    /// Steps at which at least two of the three raw readings were in band.
    pub two_in_band_steps: usize,
}

fn readings(s: &AebScenario, weather: i64, width: i64, dist: i64, n: &Noise) -> [i64; 3] {
    let p = &s.config.sensors;
    [
        model::radar(dist, width, p.radar_slope, n.radar_u as f64 / 1_000.0, n.radar_err, n.radar_offset),
        model::laser(dist, p.laser_failure_rate(weather), n.laser_u as f64 / 1_000.0, n.laser_err, n.laser_frac as f64 / 1_000.0),
        model::camera(dist, n.camera_err),
    ]
}

/// Runs scene `index` of `stream`.
pub fn simulate(scenario: &AebScenario, seed: u64, stream: &str, index: u64) -> FastEpisode {
    let mut rng = substream(seed, stream, index);
    let start = scenario.draw_scene(&mut rng);
    let mut noise = scenario.draw_noise(&mut rng);
    let known_region = start.weather <= 1 && start.width >= 1_800;
    let mut ep = FastEpisode {
        rejected: start.rejected,
        known_region,
        steps: 0,
        closest: start.lead_dist,
        perception_in_band: true,
        two_in_band_steps: 0,
    };
    if start.rejected {
        return ep;
    }
    let (mut dist, mut ego, mut lead) = (start.lead_dist, 0i64, start.lead_speed);
    let mut policy = LeadPolicy::default();
    let mut published: Option<i64> = None;
    let cruise = scenario.config.sensors.cruise_speed;
    loop {
        let r = readings(scenario, start.weather, start.width, dist, &noise);
        let fused = model::median(r[0], r[1], r[2]);
        let in_band = |x: i64| (x - dist).abs() <= model::BAND;
        ep.perception_in_band &= in_band(fused);
        if r.iter().filter(|&&x| in_band(x)).count() >= 2 {
            ep.two_in_band_steps += 1;
        }
        ep.closest = ep.closest.min(dist);
        ep.steps += 1;

        let own = model::p_buffer_dist(ego);
        let throttle = model::safety_filter(fused, published.unwrap_or(own), model::cruise_throttle(ego, cruise));
        published = Some(own);
        if ep.steps >= scenario.config.steps {
            break;
        }
        let ego_next = model::actuator(throttle, ego);
        let lead_next = (lead + scenario.lead_delta(&mut policy, &mut rng)).clamp(0, model::MAX_SPEED);
        dist -= ego - lead;
        ego = ego_next;
        lead = lead_next;
        noise = scenario.draw_noise(&mut rng);
    }
    ep
}
