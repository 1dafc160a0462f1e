//! Compositional probabilistic verification of assume-guarantee contracts.

pub mod aeb;
pub mod algebra;
pub mod assurance;
pub mod evidence;
pub mod lang;
pub mod num;
pub mod oracle;
pub mod stats;
pub mod trace;

pub use lang::{parse_formula, Contract, Formula, TruthValue, Verdict};
pub use num::Num;
