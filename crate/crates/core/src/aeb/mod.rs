//! Automatic emergency braking case study.

mod campaign;
mod catalog;
mod components;
mod fast;
pub mod model;
mod reach;
mod scenario;

pub use campaign::{
    certificates, require_proof, run_campaign, summarize, summary_csv, table_csv, CampaignError, CampaignOptions, CampaignSummary,
    Certificates, Mode, CSV_HEADER, TABLE_HEADER,
};
pub use catalog::{known_region, Catalog};
pub use components::{
    brakes, camera, car, control, cruise_controller, laser, median_filter, perception, radar, safety_filter,
    speedometer, Part, Reader, SensorParams,
};
pub use fast::{simulate, FastEpisode};
pub use reach::{adversarial_approach, reachability, KeepsDistanceChecker, ReachPayload, ReachReport, ReachState};
pub use scenario::{AebConfig, AebScenario, LeadPolicy};

/// Trace variable names.
pub mod vars {
    pub const WEATHER: &str = "params['weather']";
    pub const WIDTH: &str = "params['lead_car_width']";
    pub const BUFFER_DIST: &str = "buffer_dist";
    pub const BEHIND_CAR: &str = "behind_car";
    pub const LEAD_DIST: &str = "lead_dist";
    pub const EGO_SPEED: &str = "self.speed";
    pub const LEAD_SPEED: &str = "lead_car.speed";
    pub const RELATIVE_SPEED: &str = "true_relative_speed";
    pub const RADAR_U: &str = "noise.radar_u";
    pub const RADAR_ERR: &str = "noise.radar_err";
    pub const RADAR_OFFSET: &str = "noise.radar_offset";
    pub const LASER_U: &str = "noise.laser_u";
    pub const LASER_ERR: &str = "noise.laser_err";
    pub const LASER_FRAC: &str = "noise.laser_frac";
    pub const CAMERA_ERR: &str = "noise.camera_err";
}
