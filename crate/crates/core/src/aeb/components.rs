//! Perception, speedometer and control components of the braking system.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::model;
use super::vars;
use crate::num::Num;
use crate::trace::{compose, Component, ComponentInterface, ComponentValue, Composite, EnvState, StepError, Wire};

/// Constants shared by the sensor models and the cruise controller.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorParams {
    /// Radar failure probability per metre of width below 1.8 m.
    pub radar_slope: f64,
    pub laser_rain: f64,
    pub laser_snow: f64,
    /// Camera noise standard deviation, in metres.
    pub camera_sigma: f64,
    /// Cruise controller target speed, in millimetres per step.
    pub cruise_speed: i64,
}

impl Default for SensorParams {
    fn default() -> Self {
        SensorParams { radar_slope: 0.6, laser_rain: 0.25, laser_snow: 0.40, camera_sigma: 0.04, cruise_speed: 3_000 }
    }
}

impl SensorParams {
    pub fn laser_failure_rate(&self, weather: i64) -> f64 {
        match weather {
            2 => self.laser_rain,
            3 => self.laser_snow,
            _ => 0.0,
        }
    }
}

/// Read access for one step of a [`Part`].
pub struct Reader<'a> {
    name: &'a str,
    env: &'a EnvState,
    inputs: &'a BTreeMap<String, Num>,
    prev: Option<&'a ComponentValue>,
    pub params: &'a SensorParams,
}

fn as_milli(name: &str, var: &str, v: &Num) -> Result<i64, StepError> {
    v.to_milli().ok_or_else(|| StepError::Failed {
        component: name.into(),
        message: format!("`{var}` = {v} is not a whole number of thousandths"),
    })
}

impl Reader<'_> {
    pub fn env(&self, var: &str) -> Result<i64, StepError> {
        let v = self
            .env
            .get(var)
            .ok_or_else(|| StepError::MissingEnv { component: self.name.into(), var: var.into() })?;
        as_milli(self.name, var, v)
    }

    pub fn input(&self, port: &str) -> Result<i64, StepError> {
        let v = self
            .inputs
            .get(port)
            .ok_or_else(|| StepError::MissingInput { component: self.name.into(), port: port.into() })?;
        as_milli(self.name, port, v)
    }

    pub fn prev(&self, port: &str) -> Option<i64> {
        self.prev.and_then(|p| p.get(port)).and_then(Num::to_milli)
    }

    /// A per-mille draw in `[0, 1)` as a probability.
    pub fn unit(&self, var: &str) -> Result<f64, StepError> {
        Ok(self.env(var)? as f64 / 1_000.0)
    }
}

type StepFn = fn(&Reader<'_>) -> Result<Vec<(&'static str, i64)>, StepError>;

/// A leaf component defined by a step function over millimetre values.
pub struct Part {
    name: String,
    iface: ComponentInterface,
    params: SensorParams,
    step: StepFn,
}

impl Part {
    fn new(name: &str, iface: ComponentInterface, params: &SensorParams, step: StepFn) -> Arc<dyn Component> {
        Arc::new(Part { name: name.into(), iface, params: params.clone(), step })
    }
}

impl Component for Part {
    fn name(&self) -> &str {
        &self.name
    }

    fn interface(&self) -> &ComponentInterface {
        &self.iface
    }

    fn step(
        &self,
        env: &EnvState,
        inputs: &BTreeMap<String, Num>,
        prev: Option<&ComponentValue>,
    ) -> Result<ComponentValue, StepError> {
        let reader = Reader { name: &self.name, env, inputs, prev, params: &self.params };
        let out = (self.step)(&reader)?;
        Ok(ComponentValue::from_pairs(out.into_iter().map(|(k, v)| (k.to_string(), Num::milli(v)))))
    }
}

fn iface(inputs: &[&str], outputs: &[&str], sensors: &[&str], actions: &[&str]) -> ComponentInterface {
    ComponentInterface::new(inputs, outputs, sensors, actions).expect("disjoint port roles")
}

pub fn radar(params: &SensorParams) -> Arc<dyn Component> {
    Part::new("RadarDistanceSystem()", iface(&[], &[], &["dist1"], &[]), params, |r| {
        let d = model::radar(
            r.env(vars::LEAD_DIST)?,
            r.env(vars::WIDTH)?,
            r.params.radar_slope,
            r.unit(vars::RADAR_U)?,
            r.env(vars::RADAR_ERR)?,
            r.env(vars::RADAR_OFFSET)?,
        );
        Ok(vec![("dist1", d)])
    })
}

pub fn laser(params: &SensorParams) -> Arc<dyn Component> {
    Part::new("LaserDistanceSystem()", iface(&[], &[], &["dist2"], &[]), params, |r| {
        let rate = r.params.laser_failure_rate(r.env(vars::WEATHER)? / 1_000);
        let d = model::laser(
            r.env(vars::LEAD_DIST)?,
            rate,
            r.unit(vars::LASER_U)?,
            r.env(vars::LASER_ERR)?,
            r.unit(vars::LASER_FRAC)?,
        );
        Ok(vec![("dist2", d)])
    })
}

pub fn camera(params: &SensorParams) -> Arc<dyn Component> {
    Part::new("CameraDistanceSystem()", iface(&[], &[], &["dist3"], &[]), params, |r| {
        Ok(vec![("dist3", model::camera(r.env(vars::LEAD_DIST)?, r.env(vars::CAMERA_ERR)?))])
    })
}

pub fn median_filter(params: &SensorParams) -> Arc<dyn Component> {
    Part::new("MedianDistanceFilter()", iface(&["dist1", "dist2", "dist3"], &["dist"], &[], &[]), params, |r| {
        Ok(vec![("dist", model::median(r.input("dist1")?, r.input("dist2")?, r.input("dist3")?))])
    })
}

pub fn speedometer(params: &SensorParams) -> Arc<dyn Component> {
    Part::new("Speedometer()", iface(&[], &[], &["speed"], &[]), params, |r| Ok(vec![("speed", r.env(vars::EGO_SPEED)?)]))
}

pub fn cruise_controller(params: &SensorParams) -> Arc<dyn Component> {
    Part::new("PID()", iface(&["speed"], &["desired_throttle"], &[], &[]), params, |r| {
        Ok(vec![("desired_throttle", model::cruise_throttle(r.input("speed")?, r.params.cruise_speed))])
    })
}

/// Publishes `p_buffer_dist` for the current speed and compares the current
/// distance against the previous step's buffer (its own on the first step).
pub fn safety_filter(params: &SensorParams) -> Arc<dyn Component> {
    let ports = iface(&["dist", "speed", "desired_throttle"], &["p_buffer_dist", "modulated_throttle"], &[], &[]);
    Part::new("ThrottleSafetyFilter()", ports, params, |r| {
        let buffer = model::p_buffer_dist(r.input("speed")?);
        let threshold = r.prev("p_buffer_dist").unwrap_or(buffer);
        let throttle = model::safety_filter(r.input("dist")?, threshold, r.input("desired_throttle")?);
        Ok(vec![("p_buffer_dist", buffer), ("modulated_throttle", throttle)])
    })
}

pub fn brakes(params: &SensorParams) -> Arc<dyn Component> {
    Part::new("Brakes()", iface(&["modulated_throttle"], &[], &[], &["throttle"]), params, |r| {
        Ok(vec![("throttle", r.input("modulated_throttle")?)])
    })
}

pub fn perception(params: &SensorParams) -> Composite {
    compose(
        "PerceptionSystem()",
        vec![radar(params), laser(params), camera(params), median_filter(params)],
        vec![Wire::new(0, 3, "dist1"), Wire::new(1, 3, "dist2"), Wire::new(2, 3, "dist3")],
    )
    .expect("perception wiring")
}

pub fn control(params: &SensorParams) -> Composite {
    compose(
        "ControlSystem()",
        vec![cruise_controller(params), safety_filter(params), brakes(params)],
        vec![Wire::new(0, 1, "desired_throttle"), Wire::new(1, 2, "modulated_throttle")],
    )
    .expect("control wiring")
}

/// The whole vehicle: perception, speedometer and control.
pub fn car(params: &SensorParams) -> Composite {
    compose(
        "Car()",
        vec![Arc::new(perception(params)), speedometer(params), Arc::new(control(params))],
        vec![Wire::new(0, 2, "dist"), Wire::new(1, 2, "speed")],
    )
    .expect("car wiring")
}
