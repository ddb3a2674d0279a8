use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::autopilot::{AutopilotGains, FailsafeConfig, MissionPlan, Phase, Waypoint};
use crate::avionics::{GeoOrigin, GpsNoise, ImuNoise, ServoParams};
use crate::error::{Error, Result};
use crate::faultlab::{schedule_from_entries, FaultEntry, FaultSchedule};
use crate::flightdyn::{AircraftConfig, AircraftOverrides, DEFAULT_DT};

/// Trimmed straight-and-level start.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialCondition {
    pub altitude_m: f64,
    pub airspeed_mps: f64,
    pub heading_deg: f64,
    pub north_m: f64,
    pub east_m: f64,
    pub phase: Phase,
}

impl Default for InitialCondition {
    fn default() -> Self {
        InitialCondition {
            altitude_m: 400.0,
            airspeed_mps: 40.0,
            heading_deg: 0.0,
            north_m: 0.0,
            east_m: 0.0,
            phase: Phase::LevelFlight,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorConfig {
    pub imu: ImuNoise,
    pub gps: GpsNoise,
    pub origin: GeoOrigin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Timing {
    pub physics_dt_s: f64,
    pub control_rate_hz: u32,
    pub log_rate_hz: u32,
    pub gps_rate_hz: u32,
}

impl Default for Timing {
    fn default() -> Self {
        Timing {
            physics_dt_s: DEFAULT_DT,
            control_rate_hz: 100,
            log_rate_hz: 50,
            gps_rate_hz: 10,
        }
    }
}

impl Timing {
    /// Physics substeps per control tick.
    pub fn substeps(&self) -> usize {
        (1.0 / (self.physics_dt_s * self.control_rate_hz as f64)).round() as usize
    }

    pub fn log_decimation(&self) -> usize {
        (self.control_rate_hz / self.log_rate_hz.max(1)) as usize
    }

    pub fn gps_decimation(&self) -> usize {
        (self.control_rate_hz / self.gps_rate_hz.max(1)) as usize
    }

    pub fn control_dt(&self) -> f64 {
        1.0 / self.control_rate_hz as f64
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.physics_dt_s > 0.0) || self.control_rate_hz == 0 {
            return bad("physics_dt_s and control_rate_hz must be positive".into());
        }
        let n = self.substeps();
        if n == 0 || (n as f64 * self.physics_dt_s * self.control_rate_hz as f64 - 1.0).abs() > 1e-9 {
            return bad(format!(
                "control period 1/{} s is not a whole number of {} s physics steps",
                self.control_rate_hz, self.physics_dt_s
            ));
        }
        for (name, r) in [("log_rate_hz", self.log_rate_hz), ("gps_rate_hz", self.gps_rate_hz)] {
            if r == 0 || r > self.control_rate_hz || !self.control_rate_hz.is_multiple_of(r) {
                return bad(format!("{name} must divide control_rate_hz ({})", self.control_rate_hz));
            }
        }
        Ok(())
    }
}

/// Stops a run at a fixed time after a phase is entered.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndTrigger {
    pub phase: Phase,
    pub after_s: f64,
}

/// A scenario file as written on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    pub duration_s: f64,
    pub seed: u64,
    pub end_after: Option<EndTrigger>,
    pub aircraft: AircraftOverrides,
    pub initial: InitialCondition,
    pub mission: MissionPlan,
    pub gains: AutopilotGains,
    pub failsafe: FailsafeConfig,
    pub sensors: SensorConfig,
    pub servo: ServoParams,
    pub timing: Timing,
    pub output_dir: Option<PathBuf>,
    pub faults: Vec<FaultEntry>,
}

impl Default for ScenarioFile {
    fn default() -> Self {
        ScenarioFile {
            name: "scenario".into(),
            duration_s: 200.0,
            seed: 1,
            end_after: None,
            aircraft: AircraftOverrides::default(),
            initial: InitialCondition::default(),
            mission: MissionPlan::default(),
            gains: AutopilotGains::default(),
            failsafe: FailsafeConfig::default(),
            sensors: SensorConfig::default(),
            servo: ServoParams::default(),
            timing: Timing::default(),
            output_dir: None,
            faults: Vec::new(),
        }
    }
}

impl ScenarioFile {
    /// Level cruise at 400 m and 40 m/s heading 060 towards a distant
    /// waypoint, with the glide slope starting at 200 s.
    pub fn campaign_base() -> Self {
        let heading = 60f64.to_radians();
        let range = 100_000.0;
        ScenarioFile {
            name: "base".into(),
            duration_s: 1200.0,
            initial: InitialCondition {
                heading_deg: 60.0,
                ..InitialCondition::default()
            },
            mission: MissionPlan {
                waypoints: vec![Waypoint {
                    north: range * heading.cos(),
                    east: range * heading.sin(),
                    altitude: 400.0,
                }],
                glide_start_s: 200.0,
                ..MissionPlan::default()
            },
            ..ScenarioFile::default()
        }
    }
}

/// A validated scenario ready to fly.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub file: ScenarioFile,
    pub aircraft: AircraftConfig,
    pub schedule: FaultSchedule,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

impl Scenario {
    /// Validates a file form. Relative table paths resolve against `base_dir`.
    pub fn from_file(file: ScenarioFile, base_dir: &Path) -> Result<Self> {
        if !(file.duration_s > 0.0) {
            return Err(Error::Config(format!("duration_s must be > 0, got {}", file.duration_s)));
        }
        if let Some(e) = file.end_after {
            if !(e.after_s >= 0.0) {
                return Err(Error::Config("end_after.after_s must be >= 0".into()));
            }
        }
        let i = &file.initial;
        if !(i.altitude_m >= 0.0) || !(i.airspeed_mps > 0.0) || !i.heading_deg.is_finite() {
            return Err(Error::Config(format!("invalid initial condition {i:?}")));
        }
        file.timing.validate()?;
        file.mission.validate()?;
        file.failsafe.validate()?;
        let s = &file.servo;
        if !(s.time_constant_s > 0.0) || !(s.rate_limit_deg_s > 0.0) || !(s.position_limit_deg > 0.0) {
            return Err(Error::Config(format!("invalid servo parameters {s:?}")));
        }
        let aircraft = AircraftConfig::with_overrides(&file.aircraft, base_dir)?;
        let schedule = schedule_from_entries(&file.faults)?;
        Ok(Scenario {
            file,
            aircraft,
            schedule,
        })
    }

    pub fn parse(text: &str, source_name: &str, base_dir: &Path) -> Result<Self> {
        let file: ScenarioFile = toml::from_str(text).map_err(|e| Error::Parse {
            source_name: source_name.to_string(),
            line: e.span().map_or(0, |s| line_of(text, s.start)),
            message: e.message().to_string(),
        })?;
        Scenario::from_file(file, base_dir)
    }
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    Scenario::parse(&text, &path.display().to_string(), base)
}
