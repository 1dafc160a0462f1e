//! Contracts of the braking system, one per node of its assurance argument.

use crate::lang::{Contract, Formula};

/// Weather clear or cloudy and a lead car at least 1.8 m wide.
pub fn known_region() -> Formula {
    crate::parse_formula(KNOWN).expect("known-region formula parses")
}

const KNOWN: &str =
    "(((params['weather']) == (0)) or ((params['weather']) == (1))) and ((params['lead_car_width']) >= (1.8))";

fn accurate(port: &str) -> String {
    format!(
        "always (((behind_car) == (1)) implies ((((lead_dist) - (0.1)) <= ({port})) and (({port}) <= ((lead_dist) + (0.1)))))"
    )
}

/// `p_buffer_dist` dominates the lag-corrected stopping buffer of the
/// current speed; the sum is unrolled over the speed range.
fn buffer_bound() -> String {
    let mut sum = "(5.5) + (speed)".to_string();
    for k in 0..8 {
        let offset = 1000 - 900 * k;
        let term = if offset >= 0 {
            format!("(speed) + ({})", crate::Num::milli(offset).to_decimal().expect("decimal"))
        } else {
            format!("(speed) - ({})", crate::Num::milli(-offset).to_decimal().expect("decimal"))
        };
        sum = format!("({sum}) + (max((0), ({term})))");
    }
    format!("always ((p_buffer_dist) >= ({sum}))")
}

fn braking(port: &str) -> String {
    format!("always (((next (dist)) <= ((p_buffer_dist) + (0.1))) implies ((next ({port})) == (-(1))))")
}

const MEDIAN: &str =
    "always ((dist) == (max((min((dist1), (dist2))), (min((max((dist1), (dist2))), (dist3))))))";

const ENVELOPE: [&str; 7] = [
    "always ((behind_car) == (1))",
    "always (((0) <= (self.speed)) and ((self.speed) <= (5.4)))",
    "always (((0) <= (lead_car.speed)) and ((lead_car.speed) <= (5.4)))",
    "always (((-(0.9)) <= ((next (self.speed)) - (self.speed))) and (((next (self.speed)) - (self.speed)) <= (0.5)))",
    "always (((-(0.9)) <= ((next (lead_car.speed)) - (lead_car.speed))) and (((next (lead_car.speed)) - (lead_car.speed)) <= (0.5)))",
    "((lead_dist) > (buffer_dist)) and ((self.speed) == (0))",
    "always ((next (lead_dist)) == ((lead_dist) - (true_relative_speed)))",
];

#[derive(Debug, Clone)]
pub struct Catalog {
    pub radar: Contract,
    pub laser: Contract,
    pub median: Contract,
    pub perception_known: Contract,
    pub perception_unknown: Contract,
    pub perception: Contract,
    pub speed: Contract,
    pub filter: Contract,
    pub brakes: Contract,
    pub control: Contract,
    pub actuator: Contract,
    pub keeps_distance: Contract,
}

fn contract(name: &str, a: &str, g: &str) -> Contract {
    Contract::parse(name, a, g).unwrap_or_else(|e| panic!("catalog contract `{name}`: {e}"))
}

impl Catalog {
    pub fn build() -> Self {
        let buffer = buffer_bound();
        Catalog {
            radar: contract("Radar Accurate Distance", "(params['lead_car_width']) >= (1.8)", &accurate("dist1")),
            laser: contract(
                "Laser Accurate Distance",
                "((params['weather']) == (0)) or ((params['weather']) == (1))",
                &accurate("dist2"),
            ),
            median: contract("Median Distance Filter", "true", MEDIAN),
            perception_known: contract("Accurate Distance Known", KNOWN, &accurate("dist")),
            perception_unknown: contract("Accurate Distance Unknown", &format!("not ({KNOWN})"), &accurate("dist")),
            perception: contract("Accurate Distance", "true", &accurate("dist")),
            speed: contract("Accurate Speed", "true", "always ((speed) == (self.speed))"),
            filter: contract(
                "Safe Throttle Filter",
                "true",
                &format!("({}) and ({buffer})", braking("modulated_throttle")),
            ),
            brakes: contract("Brakes Follow Filter", "true", "always ((throttle) == (modulated_throttle))"),
            control: contract("Control System Safety", "true", &format!("({}) and ({buffer})", braking("throttle"))),
            actuator: contract(
                "Brakes Decelerate",
                "true",
                "always (((throttle) == (-(1))) implies (((next (self.speed)) == (0)) or ((next (self.speed)) == ((self.speed) - (0.9)))))",
            ),
            keeps_distance: contract(
                "Keeps Distance",
                &ENVELOPE.iter().map(|f| format!("({f})")).collect::<Vec<_>>().join(" and "),
                "always ((lead_dist) > (5))",
            ),
        }
    }

    pub fn all(&self) -> Vec<&Contract> {
        vec![
            &self.radar,
            &self.laser,
            &self.median,
            &self.perception_known,
            &self.perception_unknown,
            &self.perception,
            &self.speed,
            &self.filter,
            &self.brakes,
            &self.control,
            &self.actuator,
            &self.keeps_distance,
        ]
    }
}
