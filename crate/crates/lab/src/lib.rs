//! Scenario runner, certificate replay and fuzz suites on top of
//! `metastab-core`.

pub mod claim;
pub mod descriptor;
pub mod fuzz;
pub mod output;
pub mod runner;
pub mod scenario;
pub mod verify;

pub use output::{Format, RunDocument};
pub use runner::{run_all, run_scenario, Report, Status};
pub use scenario::{load_scenarios, parse_scenarios, Scenario};
