//! Plant, sensor and controller arithmetic in integer millimetres
//! (speeds in millimetres per step, throttles in thousandths).

/// Keeps-distance threshold.
pub const SAFE_GAP: i64 = 5_000;
/// Sensor accuracy band.
pub const BAND: i64 = 100;
pub const MAX_SPEED: i64 = 5_400;
pub const MAX_DECEL: i64 = 900;
pub const MAX_ACCEL: i64 = 500;
/// Throttle value for a full brake.
pub const FULL_BRAKE: i64 = -1_000;

/// Distance covered while braking from `speed` to a stop behind an
/// instantly stopped obstacle: `sum_k max(0, speed - 0.9 k)`.
pub fn stopping_distance(speed: i64) -> i64 {
    let mut total = 0;
    let mut s = speed;
    while s > 0 {
        total += s;
        s -= MAX_DECEL;
    }
    total
}

/// Smallest gap at which not braking keeps the invariant
/// `lead_dist > 5 + stopping_distance(speed)`: `5 + s + S(s + 0.5)`.
pub fn certified_buffer(speed: i64) -> i64 {
    SAFE_GAP + speed + stopping_distance(speed + MAX_ACCEL)
}

/// Buffer published at one step and applied at the next, when the speed
/// may have grown by one acceleration step: `certified_buffer(s + 0.5)`.
pub fn p_buffer_dist(speed: i64) -> i64 {
    certified_buffer(speed + MAX_ACCEL)
}

/// Full brake when the measured distance is within the buffer plus the
/// sensor band, otherwise the requested throttle.
pub fn safety_filter(dist: i64, buffer: i64, desired: i64) -> i64 {
    if dist <= buffer + BAND {
        FULL_BRAKE
    } else {
        desired
    }
}

/// Next speed under a throttle command in `[-1, 1]`.
pub fn actuator(throttle: i64, speed: i64) -> i64 {
    if throttle == FULL_BRAKE {
        (speed - MAX_DECEL).max(0)
    } else {
        (speed + throttle / 2).clamp(0, MAX_SPEED)
    }
}

pub fn median(d1: i64, d2: i64, d3: i64) -> i64 {
    d1.min(d2).max(d1.max(d2).min(d3))
}

/// Proportional cruise law, quantised to multiples of 0.2 so the actuator
/// keeps speeds on the 0.1 grid.
pub fn cruise_throttle(speed: i64, target: i64) -> i64 {
    let raw = (2 * (target - speed)).clamp(-1_000, 1_000);
    raw / 200 * 200
}

/// Per-reading radar failure probability for a lead car of the given width.
pub fn radar_failure_rate(width: i64, slope: f64) -> f64 {
    if width >= 1_800 {
        0.0
    } else {
        (slope * (1_800 - width) as f64 / 1_000.0).min(1.0)
    }
}

/// Radar reading: too high by `offset` on failure, otherwise in band.
pub fn radar(true_dist: i64, width: i64, slope: f64, u: f64, err: i64, offset: i64) -> i64 {
    if u < radar_failure_rate(width, slope) {
        true_dist + offset
    } else {
        (true_dist + err).max(0)
    }
}

/// Laser reading: on failure a fraction `frac` of `true_dist - 1`, floored at
/// zero; otherwise in band.
pub fn laser(true_dist: i64, failure_rate: f64, u: f64, err: i64, frac: f64) -> i64 {
    if u < failure_rate {
        ((true_dist - 1_000).max(0) as f64 * frac).floor() as i64
    } else {
        (true_dist + err).max(0)
    }
}

pub fn camera(true_dist: i64, err: i64) -> i64 {
    (true_dist + err).max(0)
}
