use serde::{Deserialize, Serialize};

use crate::autopilot::ControlCommand;

/// Control-surface servo channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ServoChannel {
    Elevator,
    Aileron,
    Rudder,
}

impl ServoChannel {
    pub const ALL: [ServoChannel; 3] = [ServoChannel::Elevator, ServoChannel::Aileron, ServoChannel::Rudder];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            ServoChannel::Elevator => "elevator",
            ServoChannel::Aileron => "aileron",
            ServoChannel::Rudder => "rudder",
        }
    }
}

/// Actual servo deflections (rad) and throttle as seen by the airframe.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SurfaceActual {
    pub elevator: f64,
    pub aileron: f64,
    pub rudder: f64,
    pub throttle: f64,
}

impl SurfaceActual {
    pub fn get(&self, ch: ServoChannel) -> f64 {
        match ch {
            ServoChannel::Elevator => self.elevator,
            ServoChannel::Aileron => self.aileron,
            ServoChannel::Rudder => self.rudder,
        }
    }
}

impl From<ControlCommand> for SurfaceActual {
    fn from(c: ControlCommand) -> Self {
        SurfaceActual {
            elevator: c.elevator,
            aileron: c.aileron,
            rudder: c.rudder,
            throttle: c.throttle,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServoParams {
    pub time_constant_s: f64,
    pub rate_limit_deg_s: f64,
    pub position_limit_deg: f64,
}

impl Default for ServoParams {
    fn default() -> Self {
        ServoParams {
            time_constant_s: 0.05,
            rate_limit_deg_s: 200.0,
            position_limit_deg: 25.0,
        }
    }
}

impl ServoParams {
    pub fn limit(&self) -> f64 {
        self.position_limit_deg.to_radians()
    }
}

/// Servo positions carried between steps.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ServoState {
    pub positions: [f64; 3],
}

impl ServoState {
    pub fn settled_at(command: &ControlCommand) -> Self {
        ServoState {
            positions: [command.elevator, command.aileron, command.rudder],
        }
    }
}

/// First-order lag with rate and position limits on each surface. Throttle
/// passes straight through, clamped to [0, 1].
pub fn servo_dynamics(
    command: &ControlCommand,
    state: &mut ServoState,
    params: &ServoParams,
    dt: f64,
) -> SurfaceActual {
    let limit = params.limit();
    let max_delta = params.rate_limit_deg_s.to_radians() * dt;
    let blend = 1.0 - (-dt / params.time_constant_s).exp();
    for ch in ServoChannel::ALL {
        let target = command.get(ch).clamp(-limit, limit);
        let x = &mut state.positions[ch.index()];
        let delta = (blend * (target - *x)).clamp(-max_delta, max_delta);
        *x = (*x + delta).clamp(-limit, limit);
    }
    SurfaceActual {
        elevator: state.positions[0],
        aileron: state.positions[1],
        rudder: state.positions[2],
        throttle: command.throttle.clamp(0.0, 1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cmd(e: f64) -> ControlCommand {
        ControlCommand {
            elevator: e,
            aileron: 0.0,
            rudder: 0.0,
            throttle: 0.5,
        }
    }

    #[test]
    fn converges_to_held_command() {
        let p = ServoParams::default();
        let mut s = ServoState::default();
        let mut out = SurfaceActual::default();
        for _ in 0..2000 {
            out = servo_dynamics(&cmd(0.1), &mut s, &p, 0.001);
        }
        assert!((out.elevator - 0.1).abs() < 1e-4);
    }

    #[test]
    fn step_reaches_63_percent_at_time_constant() {
        let p = ServoParams::default();
        let mut s = ServoState::default();
        // small step so the rate limit stays inactive
        let step = 0.05;
        let n = (p.time_constant_s / 0.001).round() as usize;
        let mut out = SurfaceActual::default();
        for _ in 0..n {
            out = servo_dynamics(&cmd(step), &mut s, &p, 0.001);
        }
        let frac = out.elevator / step;
        let expected = 1.0 - (-1.0f64).exp();
        assert!((frac - expected).abs() < 0.05 * expected, "{frac}");
    }

    #[test]
    fn clamps_at_position_limit() {
        let p = ServoParams::default();
        let mut s = ServoState::default();
        let mut out = SurfaceActual::default();
        for _ in 0..3000 {
            out = servo_dynamics(&cmd(40f64.to_radians()), &mut s, &p, 0.001);
        }
        assert!((out.elevator - 25f64.to_radians()).abs() < 1e-12);
    }

    #[test]
    fn rate_limit_bounds_each_step() {
        let p = ServoParams::default();
        let mut s = ServoState::default();
        let out = servo_dynamics(&cmd(0.4), &mut s, &p, 0.01);
        assert!(out.elevator <= 200f64.to_radians() * 0.01 + 1e-15);
    }
}
