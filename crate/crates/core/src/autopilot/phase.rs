use serde::{Deserialize, Serialize};

use crate::avionics::NavSolution;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Climb,
    LevelFlight,
    GlideSlope,
    Attack,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Climb => "climb",
            Phase::LevelFlight => "level_flight",
            Phase::GlideSlope => "glide_slope",
            Phase::Attack => "attack",
        }
    }
}

/// Mission phase with its entry time and the altitude it was entered at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlightPhase {
    pub phase: Phase,
    pub entered_at: f64,
    pub entry_altitude: f64,
    /// Time the altitude reference of a descent started.
    pub reference_start: f64,
    /// Start of the current altitude-capture interval while climbing.
    #[serde(skip)]
    pub capture_since: Option<f64>,
}

impl FlightPhase {
    pub fn new(phase: Phase, entered_at: f64, entry_altitude: f64) -> Self {
        FlightPhase {
            phase,
            entered_at,
            entry_altitude,
            reference_start: entered_at,
            capture_since: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Waypoint {
    pub north: f64,
    pub east: f64,
    pub altitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MissionPlan {
    pub waypoints: Vec<Waypoint>,
    pub cruise_speed: f64,
    pub cruise_altitude: f64,
    /// Level flight switches to the glide slope at this mission time.
    pub glide_start_s: f64,
    pub glide_angle_deg: f64,
    pub attack_altitude: f64,
    /// Climb capture band and dwell.
    pub capture_band_m: f64,
    pub capture_hold_s: f64,
    pub waypoint_radius_m: f64,
}

impl Default for MissionPlan {
    fn default() -> Self {
        MissionPlan {
            waypoints: vec![Waypoint {
                north: 100_000.0,
                east: 0.0,
                altitude: 400.0,
            }],
            cruise_speed: 40.0,
            cruise_altitude: 400.0,
            glide_start_s: f64::INFINITY,
            glide_angle_deg: 3.0,
            attack_altitude: 50.0,
            capture_band_m: 5.0,
            capture_hold_s: 2.0,
            waypoint_radius_m: 150.0,
        }
    }
}

impl MissionPlan {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.waypoints.is_empty() {
            return bad("mission needs at least one waypoint".into());
        }
        if let Some(w) = self
            .waypoints
            .iter()
            .find(|w| !(w.altitude >= 0.0) || !w.north.is_finite() || !w.east.is_finite())
        {
            return bad(format!("invalid waypoint {w:?}"));
        }
        if !(self.cruise_speed > 0.0) || !(self.cruise_altitude >= 0.0) {
            return bad("cruise speed must be positive and cruise altitude non-negative".into());
        }
        if !(self.glide_start_s >= 0.0) {
            return bad("glide_start_s must be non-negative".into());
        }
        if !(self.glide_angle_deg > 0.0 && self.glide_angle_deg < 30.0) {
            return bad("glide_angle_deg must lie in (0, 30)".into());
        }
        if !(self.attack_altitude >= 0.0) || !(self.capture_band_m > 0.0) || !(self.capture_hold_s >= 0.0) {
            return bad("invalid phase thresholds".into());
        }
        if !(self.waypoint_radius_m > 0.0) {
            return bad("waypoint_radius_m must be positive".into());
        }
        Ok(())
    }

    /// Altitude reference for the given phase at time `t`.
    pub fn altitude_reference(&self, phase: &FlightPhase, t: f64) -> (f64, f64) {
        match phase.phase {
            Phase::Climb | Phase::LevelFlight => (self.cruise_altitude, 0.0),
            Phase::GlideSlope | Phase::Attack => {
                let sink = self.cruise_speed * self.glide_angle_deg.to_radians().tan();
                let h = phase.entry_altitude - sink * (t - phase.reference_start);
                if h > 0.0 {
                    (h, -sink)
                } else {
                    (0.0, 0.0)
                }
            }
        }
    }
}

/// Advances the mission phase machine by one control tick.
pub fn phase_step(phase: FlightPhase, nav: &NavSolution, plan: &MissionPlan) -> FlightPhase {
    let t = nav.time;
    let h = nav.altitude();
    match phase.phase {
        Phase::Climb => {
            if (h - plan.cruise_altitude).abs() <= plan.capture_band_m {
                let since = phase.capture_since.unwrap_or(t);
                if t - since >= plan.capture_hold_s {
                    FlightPhase::new(Phase::LevelFlight, t, h)
                } else {
                    FlightPhase {
                        capture_since: Some(since),
                        ..phase
                    }
                }
            } else {
                FlightPhase {
                    capture_since: None,
                    ..phase
                }
            }
        }
        // the glide reference starts from the commanded altitude, not the noisy estimate
        Phase::LevelFlight if t >= plan.glide_start_s => FlightPhase::new(Phase::GlideSlope, t, plan.cruise_altitude),
        Phase::GlideSlope if h <= plan.attack_altitude => FlightPhase {
            phase: Phase::Attack,
            entered_at: t,
            ..phase
        },
        _ => phase,
    }
}
