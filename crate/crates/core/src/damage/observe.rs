//! The observer's view of a telemetry log.
//!
//! Analysis only ever sees [`ObservedFrame`]s, which carry the downlinked
//! measurements, flight-computer state and surface commands/positions. Truth
//! state and fault labels are dropped at conversion time.

use serde::{Deserialize, Serialize};

use crate::autopilot::Phase;
use crate::campaign::TelemetryRow;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservedFailsafe {
    Nominal,
    ImuPositioning,
    LevelFlightFallback,
    HoldLastRudder,
}

impl ObservedFailsafe {
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "nominal" => ObservedFailsafe::Nominal,
            "imu_positioning" => ObservedFailsafe::ImuPositioning,
            "level_flight_fallback" => ObservedFailsafe::LevelFlightFallback,
            "hold_last_rudder" => ObservedFailsafe::HoldLastRudder,
            _ => return None,
        })
    }

    /// Severity ordering used by the `failsafe_level` feature.
    pub fn level(self) -> f64 {
        match self {
            ObservedFailsafe::Nominal => 0.0,
            ObservedFailsafe::ImuPositioning => 1.0,
            ObservedFailsafe::LevelFlightFallback => 2.0,
            ObservedFailsafe::HoldLastRudder => 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservedGps {
    pub latitude_deg: f64,
    pub longitude_deg: f64,
    pub altitude_m: f64,
    pub ground_speed: f64,
    /// rad
    pub course: f64,
    pub climb_rate: f64,
    pub satellites: u32,
    pub fix_valid: bool,
}

/// One downlinked frame. Angles in rad.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservedFrame {
    pub t: f64,
    pub attitude: [f64; 3],
    pub rates: [f64; 3],
    pub accel: [f64; 3],
    pub imu_healthy: bool,
    pub gps: Option<ObservedGps>,
    pub dead_reckoning: bool,
    pub phase: Phase,
    pub failsafe: ObservedFailsafe,
    /// Elevator, aileron, rudder.
    pub cmd: [f64; 3],
    pub act: [f64; 3],
    pub throttle_cmd: f64,
    pub throttle_act: f64,
}

fn phase_from_name(name: &str) -> Option<Phase> {
    [Phase::Climb, Phase::LevelFlight, Phase::GlideSlope, Phase::Attack]
        .into_iter()
        .find(|p| p.name() == name)
}

impl ObservedFrame {
    pub fn from_row(row: &TelemetryRow) -> Result<Self> {
        let bad = |what: &str, v: &str| {
            Error::Analysis(format!("t={}: unknown {what} `{v}`", row.t))
        };
        let gps = match (
            row.meas_lat,
            row.meas_lon,
            row.meas_alt,
            row.meas_gs,
            row.meas_course,
            row.meas_climb,
            row.meas_sats,
            row.meas_fix,
        ) {
            (Some(lat), Some(lon), Some(alt), Some(gs), Some(course), Some(climb), Some(sats), Some(fix)) => {
                Some(ObservedGps {
                    latitude_deg: lat,
                    longitude_deg: lon,
                    altitude_m: alt,
                    ground_speed: gs,
                    course,
                    climb_rate: climb,
                    satellites: sats,
                    fix_valid: fix != 0,
                })
            }
            _ => None,
        };
        Ok(ObservedFrame {
            t: row.t,
            attitude: [row.meas_roll, row.meas_pitch, row.meas_yaw],
            rates: [row.meas_p, row.meas_q, row.meas_r],
            accel: [row.meas_ax, row.meas_ay, row.meas_az],
            imu_healthy: row.meas_imu_health != 0,
            gps,
            dead_reckoning: match row.nav_source.as_str() {
                "gps" => false,
                "dead_reckoning" => true,
                other => return Err(bad("nav source", other)),
            },
            phase: phase_from_name(&row.phase).ok_or_else(|| bad("phase", &row.phase))?,
            failsafe: ObservedFailsafe::from_name(&row.failsafe)
                .ok_or_else(|| bad("failsafe mode", &row.failsafe))?,
            cmd: [row.cmd_elevator, row.cmd_aileron, row.cmd_rudder],
            act: [row.act_elevator, row.act_aileron, row.act_rudder],
            throttle_cmd: row.throttle_cmd,
            throttle_act: row.throttle_act,
        })
    }
}

pub fn observe(rows: &[TelemetryRow]) -> Result<Vec<ObservedFrame>> {
    rows.iter().map(ObservedFrame::from_row).collect()
}
