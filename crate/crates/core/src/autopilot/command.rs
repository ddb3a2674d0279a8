use serde::{Deserialize, Serialize};

use crate::avionics::ServoChannel;

/// Default surface deflection limit, deg.
pub const DEFAULT_SURFACE_LIMIT_DEG: f64 = 25.0;

/// Autopilot output: surface deflections in rad and throttle in [0, 1].
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ControlCommand {
    pub elevator: f64,
    pub aileron: f64,
    pub rudder: f64,
    pub throttle: f64,
}

impl ControlCommand {
    pub fn get(&self, ch: ServoChannel) -> f64 {
        match ch {
            ServoChannel::Elevator => self.elevator,
            ServoChannel::Aileron => self.aileron,
            ServoChannel::Rudder => self.rudder,
        }
    }

    pub fn set(&mut self, ch: ServoChannel, value: f64) {
        match ch {
            ServoChannel::Elevator => self.elevator = value,
            ServoChannel::Aileron => self.aileron = value,
            ServoChannel::Rudder => self.rudder = value,
        }
    }

    /// Surfaces clamped to `±limit` rad, throttle to [0, 1].
    pub fn clamped(self, limit: f64) -> Self {
        ControlCommand {
            elevator: self.elevator.clamp(-limit, limit),
            aileron: self.aileron.clamp(-limit, limit),
            rudder: self.rudder.clamp(-limit, limit),
            throttle: self.throttle.clamp(0.0, 1.0),
        }
    }

    pub fn within(&self, limit: f64) -> bool {
        [self.elevator, self.aileron, self.rudder].iter().all(|v| v.abs() <= limit)
            && (0.0..=1.0).contains(&self.throttle)
    }
}
