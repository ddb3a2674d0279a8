use nalgebra::{UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use super::gps::{GeoOrigin, GpsReading};
use super::imu::ImuReading;
use crate::flightdyn::{RigidBodyState, GRAVITY};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NavSource {
    Gps,
    DeadReckoning,
}

impl NavSource {
    pub fn name(self) -> &'static str {
        match self {
            NavSource::Gps => "gps",
            NavSource::DeadReckoning => "dead_reckoning",
        }
    }
}

/// Navigation estimate handed to the autopilot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NavSolution {
    pub time: f64,
    /// North/east/down, m.
    pub position: Vector3<f64>,
    /// North/east/down, m/s.
    pub velocity: Vector3<f64>,
    /// Roll, pitch, yaw, rad.
    pub attitude: Vector3<f64>,
    pub rates: Vector3<f64>,
    pub source: NavSource,
}

impl NavSolution {
    /// Exact solution taken from the truth state.
    pub fn from_truth(truth: &RigidBodyState) -> Self {
        let (r, p, y) = truth.euler();
        NavSolution {
            time: truth.time,
            position: truth.position,
            velocity: truth.velocity_ned(),
            attitude: Vector3::new(r, p, y),
            rates: truth.angular_rates,
            source: NavSource::Gps,
        }
    }

    pub fn altitude(&self) -> f64 {
        -self.position.z
    }

    pub fn roll(&self) -> f64 {
        self.attitude.x
    }

    pub fn pitch(&self) -> f64 {
        self.attitude.y
    }

    pub fn yaw(&self) -> f64 {
        self.attitude.z
    }

    pub fn ground_speed(&self) -> f64 {
        self.velocity.x.hypot(self.velocity.y)
    }

    pub fn climb_rate(&self) -> f64 {
        -self.velocity.z
    }
}

/// Propagates position and velocity from IMU specific force alone.
/// Trapezoidal position update, so a constant acceleration gives the exact
/// closed-form displacement.
pub fn dead_reckon(previous: &NavSolution, imu: &ImuReading, dt: f64) -> NavSolution {
    let mut next = *previous;
    next.time = previous.time + dt;
    next.source = NavSource::DeadReckoning;
    if !imu.healthy {
        next.position += previous.velocity * dt;
        return next;
    }
    let att = UnitQuaternion::from_euler_angles(imu.attitude.x, imu.attitude.y, imu.attitude.z);
    let accel = att * imu.accel + Vector3::new(0.0, 0.0, GRAVITY);
    next.velocity = previous.velocity + accel * dt;
    next.position = previous.position + (previous.velocity + next.velocity) * (0.5 * dt);
    next.attitude = imu.attitude;
    next.rates = imu.rates;
    next
}

/// Fuses GPS epochs and IMU propagation into the autopilot's estimate.
#[derive(Debug, Clone)]
pub struct Navigator {
    origin: GeoOrigin,
    solution: NavSolution,
}

impl Navigator {
    pub fn new(origin: GeoOrigin, initial: NavSolution) -> Self {
        Navigator {
            origin,
            solution: initial,
        }
    }

    pub fn solution(&self) -> &NavSolution {
        &self.solution
    }

    /// Propagates with the IMU, then resets position and velocity from a
    /// fresh GPS epoch when the fix may be used.
    pub fn update(
        &mut self,
        imu: &ImuReading,
        gps: Option<&GpsReading>,
        gps_usable: bool,
        dt: f64,
    ) -> &NavSolution {
        let mut next = dead_reckon(&self.solution, imu, dt);
        if gps_usable {
            next.source = NavSource::Gps;
            if let Some(g) = gps.filter(|g| g.fix_valid) {
                let (n, e) = self.origin.to_local(g.latitude_deg, g.longitude_deg);
                next.position = Vector3::new(n, e, -g.altitude_m);
                next.velocity = g.velocity_ned();
            }
        }
        self.solution = next;
        &self.solution
    }
}
