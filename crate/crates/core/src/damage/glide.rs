use serde::{Deserialize, Serialize};

use super::observe::{ObservedFailsafe, ObservedFrame};

/// Ground speed and altitude at one instant of an unpowered glide.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlideSample {
    pub t: f64,
    pub altitude: f64,
    pub ground_speed: f64,
    /// Positive up, m/s.
    pub climb_rate: f64,
}

/// Forward distance covered from the first sample to touchdown, km.
///
/// Ground speed is integrated by the trapezoid rule until altitude reaches
/// zero. When the samples stop above ground, the remaining height is flown
/// off at the last sink rate and ground speed.
pub fn glide_distance_estimate(samples: &[GlideSample]) -> f64 {
    let Some(first) = samples.first() else {
        return 0.0;
    };
    if first.altitude <= 0.0 {
        return 0.0;
    }
    let mut meters = 0.0;
    for pair in samples.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let dt = b.t - a.t;
        if b.altitude <= 0.0 {
            let frac = a.altitude / (a.altitude - b.altitude);
            let gs_touch = a.ground_speed + frac * (b.ground_speed - a.ground_speed);
            meters += 0.5 * (a.ground_speed + gs_touch) * dt * frac;
            return meters / 1000.0;
        }
        meters += 0.5 * (a.ground_speed + b.ground_speed) * dt;
    }
    let last = samples[samples.len() - 1];
    let sink = -last.climb_rate;
    if sink > 0.0 {
        meters += last.altitude / sink * last.ground_speed;
    }
    meters / 1000.0
}

/// GPS-derived glide samples from the first fallback frame onward.
pub fn fallback_glide(frames: &[ObservedFrame]) -> Option<Vec<GlideSample>> {
    let start = frames
        .iter()
        .position(|f| f.failsafe == ObservedFailsafe::LevelFlightFallback)?;
    let samples: Vec<GlideSample> = frames[start..]
        .iter()
        .filter_map(|f| {
            f.gps.as_ref().map(|g| GlideSample {
                t: f.t,
                altitude: g.altitude_m,
                ground_speed: g.ground_speed,
                climb_rate: g.climb_rate,
            })
        })
        .collect();
    (!samples.is_empty()).then_some(samples)
}
