//! Closed-loop validation flights: cruise hold and altitude step.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::metrics::{step_metrics, StepMetrics};
use super::phase::Waypoint;
use crate::campaign::{run_simulation, RunOutput, Scenario, ScenarioFile, Termination};
use crate::error::{Error, Result};

/// Straight and level flight north at the given trim altitude and speed.
pub fn cruise_scenario(altitude_m: f64, airspeed_mps: f64, duration_s: f64) -> ScenarioFile {
    let mut f = ScenarioFile {
        name: "cruise".into(),
        duration_s,
        ..ScenarioFile::default()
    };
    f.initial.altitude_m = altitude_m;
    f.initial.airspeed_mps = airspeed_mps;
    f.initial.heading_deg = 0.0;
    f.mission.cruise_altitude = altitude_m;
    f.mission.cruise_speed = airspeed_mps;
    f.mission.waypoints = vec![Waypoint {
        north: 100_000.0,
        east: 0.0,
        altitude: altitude_m,
    }];
    f
}

fn fly(file: ScenarioFile) -> Result<RunOutput> {
    let name = file.name.clone();
    let out = run_simulation(&Scenario::from_file(file, Path::new("."))?)?;
    match &out.summary.termination {
        Termination::Completed => Ok(out),
        other => Err(Error::Experiment(format!(
            "{name}: run ended early ({}) at t = {:.2} s",
            other.name(),
            out.summary.end_time
        ))),
    }
}

/// Extremes of the true altitude and airspeed over a cruise flight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CruiseHold {
    pub altitude_min: f64,
    pub altitude_max: f64,
    pub airspeed_min: f64,
    pub airspeed_max: f64,
}

impl CruiseHold {
    pub fn altitude_error(&self, target: f64) -> f64 {
        (self.altitude_max - target).max(target - self.altitude_min)
    }

    pub fn airspeed_error(&self, target: f64) -> f64 {
        (self.airspeed_max - target).max(target - self.airspeed_min)
    }
}

pub fn cruise_hold_experiment(file: &ScenarioFile) -> Result<CruiseHold> {
    let out = fly(file.clone())?;
    let mut h = CruiseHold {
        altitude_min: f64::INFINITY,
        altitude_max: f64::NEG_INFINITY,
        airspeed_min: f64::INFINITY,
        airspeed_max: f64::NEG_INFINITY,
    };
    for fr in &out.frames {
        let (alt, v) = (fr.truth.altitude(), fr.truth.airspeed());
        h.altitude_min = h.altitude_min.min(alt);
        h.altitude_max = h.altitude_max.max(alt);
        h.airspeed_min = h.airspeed_min.min(v);
        h.airspeed_max = h.airspeed_max.max(v);
    }
    Ok(h)
}

pub const STEP_RUN_S: f64 = 250.0;

/// Raises the altitude target of `base` by `amplitude` m at t = 0 and
/// measures the true altitude response over 250 s.
pub fn step_response_experiment(base: &ScenarioFile, amplitude: f64) -> Result<StepMetrics> {
    if !amplitude.is_finite() || amplitude == 0.0 {
        return Err(Error::Experiment(format!("step amplitude must be non-zero, got {amplitude}")));
    }
    let h0 = base.initial.altitude_m;
    let target = h0 + amplitude;
    let mut f = base.clone();
    f.name = format!("{}-step", base.name);
    f.duration_s = STEP_RUN_S;
    f.end_after = None;
    f.mission.cruise_altitude = target;
    for wp in &mut f.mission.waypoints {
        wp.altitude = target;
    }
    let out = fly(f)?;
    let t: Vec<f64> = out.frames.iter().map(|fr| fr.t).collect();
    let h: Vec<f64> = out.frames.iter().map(|fr| fr.truth.altitude()).collect();
    let m = step_metrics(&t, &h, h0, target)?;
    if !m.settling_time_s.is_finite() {
        return Err(Error::Experiment(format!(
            "altitude never settled within the band around {target} m"
        )));
    }
    Ok(m)
}
