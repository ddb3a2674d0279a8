use serde::{Deserialize, Serialize};

use super::command::{ControlCommand, DEFAULT_SURFACE_LIMIT_DEG};
use super::failsafe::{FailsafeConfig, FailsafeMode, HoldThrottle};
use super::phase::{FlightPhase, MissionPlan};
use crate::avionics::{wrap_angle, NavSolution};
use crate::flightdyn::GRAVITY;

/// Loop gains. Angles in rad, altitude in m, speed in m/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AutopilotGains {
    pub pitch_kp: f64,
    pub pitch_rate_kd: f64,
    pub roll_kp: f64,
    pub roll_rate_kd: f64,
    pub yaw_damper: f64,
    pub altitude_kp: f64,
    pub altitude_ki: f64,
    pub climb_rate_kd: f64,
    pub speed_kp: f64,
    pub speed_ki: f64,
    pub heading_kp: f64,
    /// Cross-track distance giving a 45 deg intercept, m.
    pub cross_track_scale_m: f64,
    pub max_roll_deg: f64,
    pub min_pitch_deg: f64,
    pub max_pitch_deg: f64,
    pub surface_limit_deg: f64,
}

impl Default for AutopilotGains {
    fn default() -> Self {
        AutopilotGains {
            pitch_kp: 2.0,
            pitch_rate_kd: 0.3,
            roll_kp: 1.0,
            roll_rate_kd: 0.15,
            yaw_damper: 0.3,
            altitude_kp: 0.01,
            altitude_ki: 0.0012,
            climb_rate_kd: 0.02,
            speed_kp: 0.05,
            speed_ki: 0.01,
            heading_kp: 1.0,
            cross_track_scale_m: 150.0,
            max_roll_deg: 30.0,
            min_pitch_deg: -15.0,
            max_pitch_deg: 20.0,
            surface_limit_deg: DEFAULT_SURFACE_LIMIT_DEG,
        }
    }
}

/// Trim operating point used as feed-forward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrimPoint {
    pub command: ControlCommand,
    pub pitch: f64,
}

/// Cascaded autopilot with its integrators, waypoint sequencing and the
/// memory needed by the failsafe laws.
#[derive(Debug, Clone)]
pub struct Autopilot {
    pub gains: AutopilotGains,
    pub failsafe: FailsafeConfig,
    trim: TrimPoint,
    altitude_integral: f64,
    speed_integral: f64,
    waypoint: usize,
    leg_start: (f64, f64),
    last_nominal: ControlCommand,
    last_nominal_heading: f64,
    pitch_target: f64,
}

impl Autopilot {
    pub fn new(gains: AutopilotGains, failsafe: FailsafeConfig, trim: TrimPoint, start: &NavSolution) -> Self {
        Autopilot {
            gains,
            failsafe,
            trim,
            altitude_integral: 0.0,
            speed_integral: 0.0,
            waypoint: 0,
            leg_start: (start.position.x, start.position.y),
            last_nominal: trim.command,
            last_nominal_heading: start.yaw(),
            pitch_target: trim.pitch,
        }
    }

    pub fn trim(&self) -> &TrimPoint {
        &self.trim
    }

    /// Pitch attitude the elevator loop tracked on the last update, rad.
    pub fn pitch_target(&self) -> f64 {
        self.pitch_target
    }

    pub fn last_nominal(&self) -> &ControlCommand {
        &self.last_nominal
    }

    pub fn last_nominal_heading(&self) -> f64 {
        self.last_nominal_heading
    }

    fn limit(&self) -> f64 {
        self.gains.surface_limit_deg.to_radians()
    }

    fn elevator_for_pitch(&self, pitch_cmd: f64, nav: &NavSolution) -> f64 {
        self.trim.command.elevator - self.gains.pitch_kp * (pitch_cmd - nav.pitch())
            + self.gains.pitch_rate_kd * nav.rates.y
    }

    fn lateral_for_heading(&self, heading_cmd: f64, nav: &NavSolution) -> (f64, f64) {
        let g = &self.gains;
        let max_roll = g.max_roll_deg.to_radians();
        let roll_cmd = (g.heading_kp * wrap_angle(heading_cmd - nav.yaw())).clamp(-max_roll, max_roll);
        let aileron = self.trim.command.aileron + g.roll_kp * (roll_cmd - nav.roll()) - g.roll_rate_kd * nav.rates.x;
        let speed = nav.velocity.norm().max(5.0);
        let turn_rate = GRAVITY * nav.roll().clamp(-1.2, 1.2).tan() / speed;
        let rudder = self.trim.command.rudder - g.yaw_damper * (nav.rates.z - turn_rate);
        (aileron, rudder)
    }

    fn heading_command(&mut self, nav: &NavSolution, plan: &MissionPlan) -> f64 {
        let (n, e) = (nav.position.x, nav.position.y);
        loop {
            let wp = plan.waypoints[self.waypoint];
            let last = self.waypoint + 1 == plan.waypoints.len();
            if last || (wp.north - n).hypot(wp.east - e) > plan.waypoint_radius_m {
                break;
            }
            self.leg_start = (wp.north, wp.east);
            self.waypoint += 1;
        }
        let wp = plan.waypoints[self.waypoint];
        let (n0, e0) = self.leg_start;
        let (dn, de) = (wp.north - n0, wp.east - e0);
        if dn.hypot(de) < 1e-6 {
            return (wp.east - e).atan2(wp.north - n);
        }
        let path = de.atan2(dn);
        let cross = -path.sin() * (n - n0) + path.cos() * (e - e0);
        let intercept = (cross / self.gains.cross_track_scale_m).atan() * 0.5;
        wrap_angle(path - intercept)
    }

    /// Nominal cascaded laws on the current navigation estimate.
    fn nominal(&mut self, nav: &NavSolution, plan: &MissionPlan, phase: &FlightPhase, dt: f64) -> ControlCommand {
        let g = self.gains;
        let (h_ref, climb_ref) = plan.altitude_reference(phase, nav.time);
        let h_err = h_ref - nav.altitude();
        let pitch_min = g.min_pitch_deg.to_radians();
        let pitch_max = g.max_pitch_deg.to_radians();
        let pitch_raw = self.trim.pitch
            + g.altitude_kp * h_err
            + g.altitude_ki * self.altitude_integral
            + g.climb_rate_kd * (climb_ref - nav.climb_rate());
        let pitch_cmd = pitch_raw.clamp(pitch_min, pitch_max);
        // conditional integration keeps the integrator from winding up on the limits
        if pitch_raw == pitch_cmd || (pitch_raw > pitch_max) != (h_err > 0.0) {
            self.altitude_integral += h_err * dt;
        }
        self.pitch_target = pitch_cmd;
        let elevator = self.elevator_for_pitch(pitch_cmd, nav);

        let v_err = plan.cruise_speed - nav.velocity.norm();
        let thr_raw = self.trim.command.throttle + g.speed_kp * v_err + g.speed_ki * self.speed_integral;
        let throttle = thr_raw.clamp(0.0, 1.0);
        if thr_raw == throttle || (thr_raw > 1.0) != (v_err > 0.0) {
            self.speed_integral += v_err * dt;
        }

        let heading_cmd = self.heading_command(nav, plan);
        let (aileron, rudder) = self.lateral_for_heading(heading_cmd, nav);
        ControlCommand {
            elevator,
            aileron,
            rudder,
            throttle,
        }
        .clamped(self.limit())
    }

    /// Failsafe laws. Level-flight fallback holds the fallback pitch and the
    /// last nominal heading with the throttle closed; the IMU failure mode
    /// repeats the last nominal command; IMU positioning runs the nominal laws
    /// on the dead-reckoned estimate.
    pub fn failsafe_command(
        &mut self,
        mode: FailsafeMode,
        last_nominal: ControlCommand,
        nav: &NavSolution,
        plan: &MissionPlan,
        phase: &FlightPhase,
        dt: f64,
    ) -> ControlCommand {
        match mode {
            FailsafeMode::Nominal | FailsafeMode::ImuPositioning(_) => self.nominal(nav, plan, phase, dt),
            FailsafeMode::LevelFlightFallback(_) => {
                let pitch_cmd = self.failsafe.fallback_pitch_deg.to_radians();
                self.pitch_target = pitch_cmd;
                let elevator = self.elevator_for_pitch(pitch_cmd, nav);
                let (aileron, rudder) = self.lateral_for_heading(self.last_nominal_heading, nav);
                ControlCommand {
                    elevator,
                    aileron,
                    rudder,
                    throttle: 0.0,
                }
                .clamped(self.limit())
            }
            FailsafeMode::HoldLastRudder(_) => ControlCommand {
                throttle: match self.failsafe.hold_throttle {
                    HoldThrottle::Zero => 0.0,
                    HoldThrottle::Maintain => last_nominal.throttle,
                },
                ..last_nominal
            },
        }
    }

    /// One control tick: returns the clamped command for the given mode.
    pub fn update(
        &mut self,
        nav: &NavSolution,
        plan: &MissionPlan,
        phase: &FlightPhase,
        failsafe: FailsafeMode,
        dt: f64,
    ) -> ControlCommand {
        let last = self.last_nominal;
        let cmd = self.failsafe_command(failsafe, last, nav, plan, phase, dt);
        match failsafe {
            FailsafeMode::Nominal => {
                self.last_nominal = cmd;
                self.last_nominal_heading = nav.yaw();
            }
            FailsafeMode::ImuPositioning(_) => self.last_nominal = cmd,
            _ => {}
        }
        cmd
    }
}

/// Free-function form of [`Autopilot::update`].
pub fn autopilot_update(
    autopilot: &mut Autopilot,
    measurements: &NavSolution,
    plan: &MissionPlan,
    phase: &FlightPhase,
    failsafe: FailsafeMode,
    dt: f64,
) -> ControlCommand {
    autopilot.update(measurements, plan, phase, failsafe, dt)
}
