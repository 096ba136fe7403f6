//! Safety-constrained PDDL planning toolkit.
//!
//! Parses STRIPS domains with PDDL3 trajectory constraints, validates plans
//! into five ordered outcome categories, turns validation reports into
//! shaped rewards, schedules training problems by difficulty, generates
//! constrained problems and builds instruction datasets.

pub mod constraints;
pub mod curriculum;
pub mod datakit;
pub mod exec;
pub mod fixtures;
pub mod pddl;
pub mod probgen;
pub mod refplan;
pub mod reward;
pub mod validator;

pub use fixtures::DomainTag;
