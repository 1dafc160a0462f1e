//! Fixtures shared by the benchmarks.

use pcv_core::aeb::{car, AebConfig, AebScenario};
use pcv_core::trace::{draw, Sample, Trace};

/// The first accepted braking-scenario trace of `stream` under `seed`.
pub fn aeb_trace(seed: u64, stream: &str) -> Trace {
    let scenario = AebScenario::new(AebConfig::default());
    let vehicle = car(&scenario.config.sensors);
    (0..)
        .find_map(|i| match draw(&scenario, &vehicle, seed, stream, i).expect("scene simulates") {
            Sample::Trace(t) => Some(t),
            Sample::Rejected { .. } => None,
        })
        .expect("some scene is accepted")
}
