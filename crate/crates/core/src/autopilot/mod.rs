//! Cascaded autopilot, mission phases and failsafe management.

mod command;
mod control;
mod experiment;
mod failsafe;
mod metrics;
mod phase;

pub use command::{ControlCommand, DEFAULT_SURFACE_LIMIT_DEG};
pub use control::{autopilot_update, Autopilot, AutopilotGains, TrimPoint};
pub use experiment::{cruise_hold_experiment, cruise_scenario, step_response_experiment, CruiseHold, STEP_RUN_S};
pub use failsafe::{failsafe_step, FailsafeConfig, FailsafeMode, GpsMonitor, HoldThrottle, ImuMonitor};
pub use metrics::{step_metrics, StepMetrics, SETTLING_BAND};
pub use phase::{phase_step, FlightPhase, MissionPlan, Phase, Waypoint};
