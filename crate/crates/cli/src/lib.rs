//! Campaign specs, their interpreter, and the `pcv` subcommands.

pub mod pipeline;
pub mod selftest;
pub mod spec;

pub use pipeline::{execute, Run, RunError};
pub use spec::{CampaignSpec, Overrides, Rule, SpecError};
