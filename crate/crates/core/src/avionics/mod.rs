//! Sensor models, navigation and servo dynamics.

mod gps;
mod imu;
mod nav;
mod servo;

pub use gps::{gps_measure, GeoOrigin, GpsNoise, GpsReading, METERS_PER_DEG_LAT, MIN_VALID_SATELLITES, NOMINAL_SATELLITES};
pub(crate) use imu::{gaussian, wrap_angle};
pub use imu::{imu_measure, ImuNoise, ImuReading};
pub use nav::{dead_reckon, NavSolution, NavSource, Navigator};
pub use servo::{servo_dynamics, ServoChannel, ServoParams, ServoState, SurfaceActual};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SensorRng = ChaCha8Rng;

pub const IMU_STREAM: u64 = 1;
pub const GPS_STREAM: u64 = 2;
pub const FAULT_STREAM: u64 = 3;

/// Independent random stream for one consumer of a run's seed.
pub fn rng_stream(seed: u64, stream: u64) -> SensorRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
