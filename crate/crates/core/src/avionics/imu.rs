use nalgebra::Vector3;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::flightdyn::RigidBodyState;

/// Attitude-and-heading reference output of the IMU.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImuReading {
    pub timestamp: f64,
    /// Roll, pitch, yaw, rad.
    pub attitude: Vector3<f64>,
    /// Body rates p, q, r, rad/s.
    pub rates: Vector3<f64>,
    /// Specific force in body axes, m/s^2.
    pub accel: Vector3<f64>,
    pub healthy: bool,
}

impl ImuReading {
    /// Reading emitted by a disconnected unit.
    pub fn disconnected(timestamp: f64) -> Self {
        ImuReading {
            timestamp,
            attitude: Vector3::zeros(),
            rates: Vector3::zeros(),
            accel: Vector3::zeros(),
            healthy: false,
        }
    }
}

/// One-sigma white-noise levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImuNoise {
    pub attitude_deg: f64,
    pub rate_deg_s: f64,
    pub accel_mps2: f64,
}

impl Default for ImuNoise {
    fn default() -> Self {
        ImuNoise {
            attitude_deg: 0.05,
            rate_deg_s: 0.1,
            accel_mps2: 0.05,
        }
    }
}

impl ImuNoise {
    pub fn zero() -> Self {
        ImuNoise {
            attitude_deg: 0.0,
            rate_deg_s: 0.0,
            accel_mps2: 0.0,
        }
    }
}

pub(crate) fn gaussian<R: Rng + ?Sized>(rng: &mut R, sigma: f64) -> f64 {
    if sigma > 0.0 {
        Normal::new(0.0, sigma).expect("finite sigma").sample(rng)
    } else {
        0.0
    }
}

pub(crate) fn wrap_angle(a: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut x = a % two_pi;
    if x > std::f64::consts::PI {
        x -= two_pi;
    } else if x <= -std::f64::consts::PI {
        x += two_pi;
    }
    x
}

/// Truth plus zero-mean Gaussian noise. The noise draw order is fixed, so a
/// reading sequence is reproducible from the stream seed alone.
pub fn imu_measure<R: Rng + ?Sized>(
    truth: &RigidBodyState,
    specific_force: &Vector3<f64>,
    noise: &ImuNoise,
    rng: &mut R,
) -> ImuReading {
    let (roll, pitch, yaw) = truth.euler();
    let sa = noise.attitude_deg.to_radians();
    let sr = noise.rate_deg_s.to_radians();
    let sf = noise.accel_mps2;
    let mut draw = |s| gaussian(rng, s);
    let attitude = Vector3::new(roll + draw(sa), pitch + draw(sa), wrap_angle(yaw + draw(sa)));
    let w = truth.angular_rates;
    let rates = Vector3::new(w.x + draw(sr), w.y + draw(sr), w.z + draw(sr));
    let accel = Vector3::new(
        specific_force.x + draw(sf),
        specific_force.y + draw(sf),
        specific_force.z + draw(sf),
    );
    ImuReading {
        timestamp: truth.time,
        attitude,
        rates,
        accel,
        healthy: true,
    }
}
