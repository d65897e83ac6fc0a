//! Scenario files, orchestration and output files for the `spinjump`
//! binary.

pub mod config;
pub mod run;

pub use config::{parse_config, ConfigError, ConfigErrors, InitialState, Mode, ScenarioConfig};
pub use run::{
    compare, run_scenario, selftest, simulate, CompareReport, RunError, RunReport, ScenarioOutput,
    SelfTestCheck, SeriesRow, CSV_HEADER,
};
