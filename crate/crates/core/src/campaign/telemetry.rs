use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::autopilot::{ControlCommand, FailsafeMode, Phase};
use crate::avionics::{GpsReading, ImuReading, NavSolution, SurfaceActual};
use crate::error::{Error, Result};
use crate::flightdyn::RigidBodyState;

/// One logged control tick.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TelemetryFrame {
    pub t: f64,
    pub truth: RigidBodyState,
    /// IMU reading after fault injection.
    pub imu: ImuReading,
    /// Latest GPS reading delivered since the previous frame.
    pub gps: Option<GpsReading>,
    pub nav: NavSolution,
    pub phase: Phase,
    pub failsafe: FailsafeMode,
    pub command: ControlCommand,
    pub actual: SurfaceActual,
    /// Pitch attitude the autopilot was tracking, rad.
    pub pitch_target: f64,
    pub labels: Vec<String>,
}

/// Flat CSV row. Angles in rad, rates in rad/s, positions in m.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TelemetryRow {
    pub t: f64,
    pub px: f64,
    pub py: f64,
    pub pz: f64,
    pub u: f64,
    pub v: f64,
    pub w: f64,
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub meas_roll: f64,
    pub meas_pitch: f64,
    pub meas_yaw: f64,
    pub meas_p: f64,
    pub meas_q: f64,
    pub meas_r: f64,
    pub meas_ax: f64,
    pub meas_ay: f64,
    pub meas_az: f64,
    pub meas_imu_health: u8,
    pub meas_lat: Option<f64>,
    pub meas_lon: Option<f64>,
    pub meas_alt: Option<f64>,
    pub meas_gs: Option<f64>,
    pub meas_course: Option<f64>,
    pub meas_climb: Option<f64>,
    pub meas_sats: Option<u32>,
    pub meas_fix: Option<u8>,
    pub nav_source: String,
    pub phase: String,
    pub failsafe: String,
    pub cmd_elevator: f64,
    pub cmd_aileron: f64,
    pub cmd_rudder: f64,
    pub act_elevator: f64,
    pub act_aileron: f64,
    pub act_rudder: f64,
    pub throttle_cmd: f64,
    pub throttle_act: f64,
    pub fault_labels: String,
}

/// CSV header, in column order.
pub const TELEMETRY_COLUMNS: [&str; 43] = [
    "t", "px", "py", "pz", "u", "v", "w", "roll", "pitch", "yaw", "p", "q", "r", "meas_roll", "meas_pitch",
    "meas_yaw", "meas_p", "meas_q", "meas_r", "meas_ax", "meas_ay", "meas_az", "meas_imu_health", "meas_lat",
    "meas_lon", "meas_alt", "meas_gs", "meas_course", "meas_climb", "meas_sats", "meas_fix", "nav_source", "phase",
    "failsafe", "cmd_elevator", "cmd_aileron", "cmd_rudder", "act_elevator", "act_aileron", "act_rudder",
    "throttle_cmd", "throttle_act", "fault_labels",
];

impl TelemetryFrame {
    pub fn to_row(&self) -> TelemetryRow {
        let s = &self.truth;
        let (roll, pitch, yaw) = s.euler();
        let g = self.gps.as_ref();
        TelemetryRow {
            t: self.t,
            px: s.position.x,
            py: s.position.y,
            pz: s.position.z,
            u: s.velocity_body.x,
            v: s.velocity_body.y,
            w: s.velocity_body.z,
            roll,
            pitch,
            yaw,
            p: s.angular_rates.x,
            q: s.angular_rates.y,
            r: s.angular_rates.z,
            meas_roll: self.imu.attitude.x,
            meas_pitch: self.imu.attitude.y,
            meas_yaw: self.imu.attitude.z,
            meas_p: self.imu.rates.x,
            meas_q: self.imu.rates.y,
            meas_r: self.imu.rates.z,
            meas_ax: self.imu.accel.x,
            meas_ay: self.imu.accel.y,
            meas_az: self.imu.accel.z,
            meas_imu_health: self.imu.healthy as u8,
            meas_lat: g.map(|g| g.latitude_deg),
            meas_lon: g.map(|g| g.longitude_deg),
            meas_alt: g.map(|g| g.altitude_m),
            meas_gs: g.map(|g| g.ground_speed),
            meas_course: g.map(|g| g.course),
            meas_climb: g.map(|g| g.climb_rate),
            meas_sats: g.map(|g| g.satellites),
            meas_fix: g.map(|g| g.fix_valid as u8),
            nav_source: self.nav.source.name().into(),
            phase: self.phase.name().into(),
            failsafe: self.failsafe.name().into(),
            cmd_elevator: self.command.elevator,
            cmd_aileron: self.command.aileron,
            cmd_rudder: self.command.rudder,
            act_elevator: self.actual.elevator,
            act_aileron: self.actual.aileron,
            act_rudder: self.actual.rudder,
            throttle_cmd: self.command.throttle,
            throttle_act: self.actual.throttle,
            fault_labels: self.labels.join(";"),
        }
    }
}

impl TelemetryRow {
    pub fn altitude(&self) -> f64 {
        -self.pz
    }

    pub fn airspeed(&self) -> f64 {
        (self.u * self.u + self.v * self.v + self.w * self.w).sqrt()
    }
}

pub fn write_telemetry<W: Write>(rows: impl IntoIterator<Item = TelemetryRow>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io("<telemetry>", e))?;
    Ok(())
}

pub fn read_telemetry<R: Read>(input: R) -> Result<Vec<TelemetryRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != TELEMETRY_COLUMNS {
        return Err(Error::Parse {
            source_name: "telemetry".into(),
            line: 1,
            message: "unexpected telemetry header".into(),
        });
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn read_telemetry_file(path: &Path) -> Result<Vec<TelemetryRow>> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_telemetry(std::io::BufReader::new(f))
}
