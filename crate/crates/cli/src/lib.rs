//! Scenario files, CSV rendering and command implementations behind the
//! `fpdce` binary.

pub mod commands;
pub mod scenario_file;

pub use commands::NumberFormat;
pub use scenario_file::{parse_scenario, serialize_scenario, ScenarioFileError};
