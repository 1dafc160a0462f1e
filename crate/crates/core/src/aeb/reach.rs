//! Exhaustive reachability over the discretised braking dynamics.
//!
//! States are `(lead_dist, ego speed, lead speed)` in tenths of a metre
//! (per step). From each state the lead car and, when not forced to brake,
//! the ego car may take any speed change in `[-0.9, +0.5]`. A full brake
//! leaves the ego at `0` or `speed - 0.9`. The ego is forced to brake when
//! the best-case sensor reading `lead_dist + 0.1` is within `threshold(speed)
//! + 0.1`.
//!
//! For a filter that compares against the previous step's buffer `P(s_prev)`
//! the forcing threshold is at least `P(max(0, s - 0.5))`, because the speed
//! grows by at most 0.5 per step. Using that bound only widens the ego's
//! choices, so the search over-approximates the closed loop.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::catalog::Catalog;
use super::model;
use crate::algebra::{op_compose, refinement_obligation};
use crate::evidence::{CheckOutcome, ProofCertificate, ProofChecker};
use crate::lang::Contract;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReachState {
    pub lead_dist: i32,
    pub ego_speed: i32,
    pub lead_speed: i32,
}

/// Parameters of the search, in tenths.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReachPayload {
    /// Distances above this saturate.
    pub max_dist: i32,
    /// Initial states have `lead_dist > initial_gap` and a stopped ego.
    pub initial_gap: i32,
    /// A state with `lead_dist <= safe_gap` is a violation.
    pub safe_gap: i32,
}

impl Default for ReachPayload {
    fn default() -> Self {
        ReachPayload { max_dist: 600, initial_gap: 100, safe_gap: 50 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachReport {
    pub reachable: usize,
    /// Shortest path to a violating state, if any.
    pub violation: Option<Vec<ReachState>>,
}

const SPEEDS: i32 = (model::MAX_SPEED / 100) as i32 + 1;
const DECEL: i32 = (model::MAX_DECEL / 100) as i32;
const ACCEL: i32 = (model::MAX_ACCEL / 100) as i32;

/// Forcing threshold in tenths for a lagged filter whose buffer is
/// `buffer(speed)` in millimetres.
fn lagged_threshold(buffer: fn(i64) -> i64, speed: i32) -> i32 {
    let prev = (i64::from(speed) * 100 - model::MAX_ACCEL).max(0);
    // Floor to the grid: states at or below the floored value are forced.
    (buffer(prev).div_euclid(100)) as i32
}

/// Breadth-first search from every initial state.
pub fn reachability(payload: &ReachPayload, buffer: fn(i64) -> i64) -> ReachReport {
    let dist_count = (payload.max_dist + 1) as usize;
    let index = |s: ReachState| -> usize {
        (s.lead_dist as usize * SPEEDS as usize + s.ego_speed as usize) * SPEEDS as usize + s.lead_speed as usize
    };
    let unpack = |i: usize| -> ReachState {
        let lead_speed = (i % SPEEDS as usize) as i32;
        let rest = i / SPEEDS as usize;
        ReachState { lead_dist: (rest / SPEEDS as usize) as i32, ego_speed: (rest % SPEEDS as usize) as i32, lead_speed }
    };
    let total = dist_count * (SPEEDS * SPEEDS) as usize;
    let mut parent = vec![u32::MAX; total];
    let mut queue = VecDeque::new();
    let thresholds: Vec<i32> = (0..SPEEDS).map(|s| lagged_threshold(buffer, s)).collect();

    for d in payload.initial_gap + 1..=payload.max_dist {
        for l in 0..SPEEDS {
            let s = ReachState { lead_dist: d, ego_speed: 0, lead_speed: l };
            let i = index(s);
            parent[i] = i as u32;
            queue.push_back(i);
        }
    }
    let mut reachable = queue.len();
    while let Some(i) = queue.pop_front() {
        let st = unpack(i);
        let raw = st.lead_dist - st.ego_speed + st.lead_speed;
        let forced = st.lead_dist <= thresholds[st.ego_speed as usize];
        let egos: Vec<i32> = if forced {
            let mut brake = vec![0];
            if st.ego_speed >= DECEL {
                brake.push(st.ego_speed - DECEL);
            }
            brake
        } else {
            ((st.ego_speed - DECEL).max(0)..=(st.ego_speed + ACCEL).min(SPEEDS - 1)).collect()
        };
        if raw <= payload.safe_gap {
            let mut path = vec![ReachState { lead_dist: raw, ego_speed: egos[0], lead_speed: st.lead_speed }];
            let mut k = i;
            loop {
                path.push(unpack(k));
                if parent[k] as usize == k {
                    break;
                }
                k = parent[k] as usize;
            }
            path.reverse();
            return ReachReport { reachable, violation: Some(path) };
        }
        let next_dist = raw.min(payload.max_dist);
        for &e in &egos {
            for l in (st.lead_speed - DECEL).max(0)..=(st.lead_speed + ACCEL).min(SPEEDS - 1) {
                let j = index(ReachState { lead_dist: next_dist, ego_speed: e, lead_speed: l });
                if parent[j] == u32::MAX {
                    parent[j] = i as u32;
                    reachable += 1;
                    queue.push_back(j);
                }
            }
        }
    }
    ReachReport { reachable, violation: None }
}

/// Drives the lagged filter against a stopped lead car, with the ego
/// accelerating whenever it is not forced to brake and the sensor reading
/// as high as the band allows. Returns the closest gap reached, in mm.
pub fn adversarial_approach(buffer: fn(i64) -> i64, start_gap: i64, steps: usize) -> i64 {
    let mut dist = start_gap;
    let mut speed = 0;
    let mut published: Option<i64> = None;
    let mut closest = dist;
    for _ in 0..steps {
        let own = buffer(speed);
        let threshold = published.unwrap_or(own);
        let throttle = model::safety_filter(dist + model::BAND, threshold, 1_000);
        published = Some(own);
        dist -= speed;
        speed = model::actuator(throttle, speed);
        closest = closest.min(dist);
    }
    closest
}

/// Accepts the refinement from the composed subsystem contracts to
/// Keeps Distance when the reachability search finds no violation.
pub struct KeepsDistanceChecker {
    id: String,
    theorem: Contract,
}

impl KeepsDistanceChecker {
    pub const ID: &'static str = "aeb-reachability";

    pub fn new() -> Self {
        KeepsDistanceChecker { id: Self::ID.into(), theorem: Self::theorem(&Catalog::build()) }
    }

    /// The refinement obligation this checker knows how to discharge.
    pub fn theorem(cat: &Catalog) -> Contract {
        let subsystems = [&cat.speed, &cat.control, &cat.actuator]
            .into_iter()
            .fold(cat.perception.clone(), |acc, c| op_compose(&acc, c));
        refinement_obligation(&subsystems, &cat.keeps_distance)
    }
}

impl Default for KeepsDistanceChecker {
    fn default() -> Self {
        Self::new()
    }
}

impl ProofChecker for KeepsDistanceChecker {
    fn id(&self) -> &str {
        &self.id
    }

    fn check(&self, cert: &ProofCertificate, contract: &Contract) -> CheckOutcome {
        if contract.hash() != self.theorem.hash() {
            return CheckOutcome::Rejected {
                reason: "obligation is not the keeps-distance refinement".into(),
                counterexample: None,
            };
        }
        let payload: ReachPayload = match serde_json::from_value(cert.payload.clone()) {
            Ok(p) => p,
            Err(e) => return CheckOutcome::Refused { reason: format!("bad payload: {e}") },
        };
        if payload.max_dist <= payload.initial_gap || payload.initial_gap <= payload.safe_gap || payload.safe_gap < 0 {
            return CheckOutcome::Refused { reason: "payload gaps must satisfy 0 <= safe < initial < max".into() };
        }
        let report = reachability(&payload, model::p_buffer_dist);
        match report.violation {
            None => CheckOutcome::Accepted {
                scope: format!(
                    "reachability on the 0.1 m and 0.1 m/step grid, lead_dist saturating at {} m, {} reachable states",
                    f64::from(payload.max_dist) / 10.0,
                    report.reachable
                ),
            },
            Some(path) => CheckOutcome::Rejected {
                reason: format!("violation reachable in {} steps: {:?}", path.len() - 1, path.last()),
                counterexample: None,
            },
        }
    }
}
