use nalgebra::Vector3;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::imu::{gaussian, wrap_angle};
use crate::flightdyn::RigidBodyState;

/// Metres per degree of latitude in the flat-Earth conversion.
pub const METERS_PER_DEG_LAT: f64 = 111_320.0;
/// Fix declared invalid below this many satellites.
pub const MIN_VALID_SATELLITES: u32 = 8;
pub const NOMINAL_SATELLITES: u32 = 15;

/// Reference point of the local north/east/down frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeoOrigin {
    pub latitude_deg: f64,
    pub longitude_deg: f64,
}

impl Default for GeoOrigin {
    fn default() -> Self {
        GeoOrigin {
            latitude_deg: 34.0,
            longitude_deg: 108.0,
        }
    }
}

impl GeoOrigin {
    fn meters_per_deg_lon(&self) -> f64 {
        METERS_PER_DEG_LAT * self.latitude_deg.to_radians().cos()
    }

    pub fn to_geodetic(&self, north: f64, east: f64) -> (f64, f64) {
        (
            self.latitude_deg + north / METERS_PER_DEG_LAT,
            self.longitude_deg + east / self.meters_per_deg_lon(),
        )
    }

    pub fn to_local(&self, latitude_deg: f64, longitude_deg: f64) -> (f64, f64) {
        (
            (latitude_deg - self.latitude_deg) * METERS_PER_DEG_LAT,
            (longitude_deg - self.longitude_deg) * self.meters_per_deg_lon(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpsReading {
    pub timestamp: f64,
    pub latitude_deg: f64,
    pub longitude_deg: f64,
    pub altitude_m: f64,
    pub ground_speed: f64,
    /// Course over ground, rad from north.
    pub course: f64,
    /// Positive up, m/s.
    pub climb_rate: f64,
    pub satellites: u32,
    pub fix_valid: bool,
}

impl GpsReading {
    pub fn set_satellites(&mut self, n: u32) {
        self.satellites = n;
        self.fix_valid = self.fix_valid && n >= MIN_VALID_SATELLITES;
    }

    pub fn velocity_ned(&self) -> Vector3<f64> {
        Vector3::new(
            self.ground_speed * self.course.cos(),
            self.ground_speed * self.course.sin(),
            -self.climb_rate,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GpsNoise {
    pub horizontal_m: f64,
    pub vertical_m: f64,
    pub velocity_mps: f64,
}

impl Default for GpsNoise {
    fn default() -> Self {
        GpsNoise {
            horizontal_m: 0.01,
            vertical_m: 0.02,
            velocity_mps: 0.03,
        }
    }
}

impl GpsNoise {
    pub fn zero() -> Self {
        GpsNoise {
            horizontal_m: 0.0,
            vertical_m: 0.0,
            velocity_mps: 0.0,
        }
    }
}

pub fn gps_measure<R: Rng + ?Sized>(
    truth: &RigidBodyState,
    origin: &GeoOrigin,
    noise: &GpsNoise,
    rng: &mut R,
) -> GpsReading {
    let mut draw = |s| gaussian(rng, s);
    let north = truth.position.x + draw(noise.horizontal_m);
    let east = truth.position.y + draw(noise.horizontal_m);
    let alt = truth.altitude() + draw(noise.vertical_m);
    let v = truth.velocity_ned();
    let vn = v.x + draw(noise.velocity_mps);
    let ve = v.y + draw(noise.velocity_mps);
    let vd = v.z + draw(noise.velocity_mps);
    let (lat, lon) = origin.to_geodetic(north, east);
    GpsReading {
        timestamp: truth.time,
        latitude_deg: lat,
        longitude_deg: lon,
        altitude_m: alt,
        ground_speed: vn.hypot(ve),
        course: wrap_angle(ve.atan2(vn)),
        climb_rate: -vd,
        satellites: NOMINAL_SATELLITES,
        fix_valid: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::avionics::rng_stream;

    #[test]
    fn origin_maps_to_origin() {
        let o = GeoOrigin::default();
        let t = RigidBodyState::at_rest(100.0);
        let r = gps_measure(&t, &o, &GpsNoise::zero(), &mut rng_stream(0, 2));
        assert_eq!((r.latitude_deg, r.longitude_deg), (34.0, 108.0));
        let r = gps_measure(&t, &o, &GpsNoise::default(), &mut rng_stream(0, 2));
        assert!((r.latitude_deg - 34.0).abs() * METERS_PER_DEG_LAT < 0.1);
    }

    #[test]
    fn one_degree_north() {
        let o = GeoOrigin::default();
        let mut t = RigidBodyState::at_rest(100.0);
        t.position.x = 111_320.0;
        let r = gps_measure(&t, &o, &GpsNoise::zero(), &mut rng_stream(0, 2));
        // one degree = 111320 m, independent of the origin
        assert!((r.latitude_deg - 35.0).abs() < 1e-12);
        assert!((r.longitude_deg - 108.0).abs() < 1e-12);
    }

    #[test]
    fn default_satellites_and_fix() {
        let r = gps_measure(
            &RigidBodyState::at_rest(0.0),
            &GeoOrigin::default(),
            &GpsNoise::default(),
            &mut rng_stream(3, 2),
        );
        assert_eq!(r.satellites, 15);
        assert!(r.fix_valid);
    }

    #[test]
    fn local_round_trip() {
        let o = GeoOrigin::default();
        let (lat, lon) = o.to_geodetic(1234.5, -987.25);
        let (n, e) = o.to_local(lat, lon);
        assert!((n - 1234.5).abs() < 1e-6 && (e + 987.25).abs() < 1e-6);
    }

    #[test]
    fn low_satellite_count_invalidates_fix() {
        let mut r = gps_measure(
            &RigidBodyState::at_rest(0.0),
            &GeoOrigin::default(),
            &GpsNoise::zero(),
            &mut rng_stream(3, 2),
        );
        r.set_satellites(12);
        assert!(r.fix_valid);
        r.set_satellites(7);
        assert!(!r.fix_valid);
    }
}
