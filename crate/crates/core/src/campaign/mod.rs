//! Scenario files, the closed-loop runner, telemetry and batch campaigns.

mod matrix;
mod runner;
mod scenario;
mod telemetry;

pub use matrix::{load_index, run_campaign, CampaignIndex, CampaignMatrix, IndexEntry, MatrixEntry, RunPlan};
pub use runner::{run_simulation, run_simulation_with, write_run, RunOptions, RunOutput, RunSummary, Termination, Transition};
pub(crate) use runner::write_json;
pub use scenario::{load_scenario, EndTrigger, InitialCondition, Scenario, ScenarioFile, SensorConfig, Timing};
pub use telemetry::{read_telemetry, read_telemetry_file, write_telemetry, TelemetryFrame, TelemetryRow, TELEMETRY_COLUMNS};
