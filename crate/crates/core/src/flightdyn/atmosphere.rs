use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SEA_LEVEL_TEMPERATURE: f64 = 288.15;
pub const SEA_LEVEL_PRESSURE: f64 = 101_325.0;
pub const LAPSE_RATE: f64 = 0.0065;
pub const GAS_CONSTANT_AIR: f64 = 287.052_87;
pub const HEAT_CAPACITY_RATIO: f64 = 1.4;
/// Standard gravity used by the pressure-altitude relation (not the
/// simulation's constant gravity).
const ISA_GRAVITY: f64 = 9.806_65;

pub const MIN_ALTITUDE: f64 = -500.0;
pub const MAX_ALTITUDE: f64 = 11_000.0;

/// Air properties at the vehicle, plus the airflow angles once a velocity is
/// attached with [`AirData::with_velocity`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AirData {
    pub density: f64,
    pub speed_of_sound: f64,
    pub airspeed: f64,
    /// Angle of attack, rad.
    pub alpha: f64,
    /// Sideslip, rad.
    pub beta: f64,
}

impl AirData {
    /// Attaches body-frame air-relative velocity (no wind: body velocity).
    pub fn with_velocity(mut self, velocity_body: &Vector3<f64>) -> Self {
        let v = velocity_body.norm();
        self.airspeed = v;
        if v > 1e-9 {
            self.alpha = velocity_body.z.atan2(velocity_body.x);
            self.beta = (velocity_body.y / v).clamp(-1.0, 1.0).asin();
        } else {
            self.alpha = 0.0;
            self.beta = 0.0;
        }
        self
    }

    pub fn dynamic_pressure(&self) -> f64 {
        0.5 * self.density * self.airspeed * self.airspeed
    }

    pub fn mach(&self) -> f64 {
        self.airspeed / self.speed_of_sound
    }
}

/// ISA troposphere.
pub fn standard_atmosphere(altitude: f64) -> Result<AirData> {
    if !(MIN_ALTITUDE..=MAX_ALTITUDE).contains(&altitude) {
        return Err(Error::Config(format!(
            "altitude {altitude} m outside standard-atmosphere range [{MIN_ALTITUDE}, {MAX_ALTITUDE}]"
        )));
    }
    let temperature = SEA_LEVEL_TEMPERATURE - LAPSE_RATE * altitude;
    let exponent = ISA_GRAVITY / (LAPSE_RATE * GAS_CONSTANT_AIR);
    let pressure = SEA_LEVEL_PRESSURE * (temperature / SEA_LEVEL_TEMPERATURE).powf(exponent);
    Ok(AirData {
        density: pressure / (GAS_CONSTANT_AIR * temperature),
        speed_of_sound: (HEAT_CAPACITY_RATIO * GAS_CONSTANT_AIR * temperature).sqrt(),
        airspeed: 0.0,
        alpha: 0.0,
        beta: 0.0,
    })
}

/// Like [`standard_atmosphere`] but clamps the altitude into the model range,
/// for use inside the integrator where a crash trajectory may briefly leave it.
pub fn standard_atmosphere_clamped(altitude: f64) -> AirData {
    let h = if altitude.is_finite() {
        altitude.clamp(MIN_ALTITUDE, MAX_ALTITUDE)
    } else {
        0.0
    };
    standard_atmosphere(h).expect("clamped altitude is in range")
}
