use serde::{Deserialize, Serialize};

use crate::avionics::ServoChannel;
use crate::error::{Error, Result};

/// Sensor channels the IMU faults act on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImuChannel {
    Roll,
    Pitch,
    Yaw,
    RollRate,
    PitchRate,
    YawRate,
    AccelX,
    AccelY,
    AccelZ,
}

impl ImuChannel {
    pub const ALL: [ImuChannel; 9] = [
        ImuChannel::Roll,
        ImuChannel::Pitch,
        ImuChannel::Yaw,
        ImuChannel::RollRate,
        ImuChannel::PitchRate,
        ImuChannel::YawRate,
        ImuChannel::AccelX,
        ImuChannel::AccelY,
        ImuChannel::AccelZ,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ImuChannel::Roll => "roll",
            ImuChannel::Pitch => "pitch",
            ImuChannel::Yaw => "yaw",
            ImuChannel::RollRate => "roll_rate",
            ImuChannel::PitchRate => "pitch_rate",
            ImuChannel::YawRate => "yaw_rate",
            ImuChannel::AccelX => "accel_x",
            ImuChannel::AccelY => "accel_y",
            ImuChannel::AccelZ => "accel_z",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }

    /// Scale from file units (deg, deg/s, m/s^2) to SI.
    pub fn unit_scale(self) -> f64 {
        match self {
            ImuChannel::AccelX | ImuChannel::AccelY | ImuChannel::AccelZ => 1.0,
            _ => std::f64::consts::PI / 180.0,
        }
    }
}

/// One discrete deviation pulse, relative to fault onset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pulse {
    pub offset_s: f64,
    pub width_s: f64,
    pub amplitude: f64,
}

/// Sensor fault modes of `y_s = k(t) y + d(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SensorMode {
    FaultFree,
    Multiplicative { gain: f64 },
    ConstantDeviation { bias: f64 },
    /// Linear ramp at `rate` for `ramp_s`, then held.
    Drift { rate: f64, ramp_s: f64 },
    TransientDrift { pulses: Vec<Pulse> },
    Disconnect,
}

impl SensorMode {
    pub fn name(&self) -> &'static str {
        match self {
            SensorMode::FaultFree => "fault_free",
            SensorMode::Multiplicative { .. } => "multiplicative",
            SensorMode::ConstantDeviation { .. } => "constant_deviation",
            SensorMode::Drift { .. } => "drift",
            SensorMode::TransientDrift { .. } => "transient_drift",
            SensorMode::Disconnect => "disconnect",
        }
    }

    /// Checks the (k, d) pattern of the mode.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let finite = |v: f64, what: &str| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(format!("{what} must be finite"))
            }
        };
        match self {
            SensorMode::FaultFree | SensorMode::Disconnect => Ok(()),
            SensorMode::Multiplicative { gain } => {
                finite(*gain, "gain")?;
                if *gain == 1.0 {
                    return Err("multiplicative fault needs gain != 1".into());
                }
                Ok(())
            }
            SensorMode::ConstantDeviation { bias } => {
                finite(*bias, "bias")?;
                if *bias == 0.0 {
                    return Err("constant deviation needs a non-zero bias".into());
                }
                Ok(())
            }
            SensorMode::Drift { rate, ramp_s } => {
                finite(*rate, "rate")?;
                if *rate == 0.0 || !(*ramp_s > 0.0) {
                    return Err("drift needs a non-zero rate and a positive ramp time".into());
                }
                Ok(())
            }
            SensorMode::TransientDrift { pulses } => {
                if pulses.is_empty() {
                    return Err("transient drift needs at least one pulse".into());
                }
                for p in pulses {
                    finite(p.amplitude, "pulse amplitude")?;
                    if !(p.offset_s >= 0.0) || !(p.width_s > 0.0) || p.amplitude == 0.0 {
                        return Err(format!("invalid pulse {p:?}"));
                    }
                }
                Ok(())
            }
        }
    }

    /// Gain k at `elapsed` seconds after onset.
    pub fn k(&self, _elapsed: f64) -> f64 {
        match self {
            SensorMode::Multiplicative { gain } => *gain,
            SensorMode::Disconnect => 0.0,
            _ => 1.0,
        }
    }

    /// Deviation d at `elapsed` seconds after onset.
    pub fn d(&self, elapsed: f64) -> f64 {
        match self {
            SensorMode::ConstantDeviation { bias } => *bias,
            SensorMode::Drift { rate, ramp_s } => rate * elapsed.clamp(0.0, *ramp_s),
            SensorMode::TransientDrift { pulses } => pulses
                .iter()
                .filter(|p| elapsed >= p.offset_s && elapsed < p.offset_s + p.width_s)
                .map(|p| p.amplitude)
                .sum(),
            _ => 0.0,
        }
    }
}

/// An active sensor fault on one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorFaultState {
    pub channel: ImuChannel,
    pub mode: SensorMode,
    pub onset: f64,
}

impl SensorFaultState {
    pub fn k(&self, t: f64) -> f64 {
        self.mode.k(t - self.onset)
    }

    pub fn d(&self, t: f64) -> f64 {
        self.mode.d(t - self.onset)
    }
}

/// `y_s(t) = k(t) y(t) + d(t)`.
pub fn apply_sensor_fault(y: f64, fault: &SensorFaultState, t: f64) -> f64 {
    fault.k(t) * y + fault.d(t)
}

/// Servo fault modes of `u_m = k(t) u_c + d(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ActuatorMode {
    FaultFree,
    ConstantDeviation { bias: f64 },
    /// k = 0 with d latched to the surface position at onset.
    Stuck,
    /// Reduced gain plus a low-pass wander of standard deviation `sigma`.
    Loose { gain: f64, sigma: f64, tau_s: f64 },
    Damage { gain: f64 },
    /// Alternates k between `fault_gain` (first `on_s`) and 1 (next `off_s`).
    Jitter { fault_gain: f64, on_s: f64, off_s: f64 },
}

impl ActuatorMode {
    pub fn name(&self) -> &'static str {
        match self {
            ActuatorMode::FaultFree => "fault_free",
            ActuatorMode::ConstantDeviation { .. } => "constant_deviation",
            ActuatorMode::Stuck => "stuck",
            ActuatorMode::Loose { .. } => "loose",
            ActuatorMode::Damage { .. } => "damage",
            ActuatorMode::Jitter { .. } => "jitter",
        }
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        match *self {
            ActuatorMode::FaultFree | ActuatorMode::Stuck => Ok(()),
            ActuatorMode::ConstantDeviation { bias } => {
                if bias.is_finite() && bias != 0.0 {
                    Ok(())
                } else {
                    Err("constant deviation needs a finite non-zero bias".into())
                }
            }
            ActuatorMode::Loose { gain, sigma, tau_s } => {
                if (0.0..=1.0).contains(&gain) && sigma > 0.0 && sigma.is_finite() && tau_s > 0.0 {
                    Ok(())
                } else {
                    Err("loose needs gain in [0, 1], positive sigma and time constant".into())
                }
            }
            ActuatorMode::Damage { gain } => {
                if gain > 0.0 && gain < 1.0 {
                    Ok(())
                } else {
                    Err("damage needs gain in (0, 1)".into())
                }
            }
            ActuatorMode::Jitter { fault_gain, on_s, off_s } => {
                if fault_gain.is_finite() && fault_gain != 1.0 && on_s > 0.0 && off_s > 0.0 && (on_s + off_s).is_finite() {
                    Ok(())
                } else {
                    Err("jitter needs fault gain != 1 and positive on/off times".into())
                }
            }
        }
    }
}

/// An active servo fault on one channel, with its per-run memory.
#[derive(Debug, Clone, PartialEq)]
pub struct ActuatorFaultState {
    pub channel: ServoChannel,
    pub mode: ActuatorMode,
    pub onset: f64,
    /// Surface position captured at onset (stuck mode).
    pub latched: f64,
    /// Current wander deviation (loose mode).
    pub wander: f64,
}

impl ActuatorFaultState {
    pub fn new(channel: ServoChannel, mode: ActuatorMode, onset: f64, position_at_onset: f64) -> Self {
        ActuatorFaultState {
            channel,
            mode,
            onset,
            latched: position_at_onset,
            wander: 0.0,
        }
    }

    pub fn k(&self, t: f64) -> f64 {
        match self.mode {
            ActuatorMode::FaultFree | ActuatorMode::ConstantDeviation { .. } => 1.0,
            ActuatorMode::Stuck => 0.0,
            ActuatorMode::Loose { gain, .. } | ActuatorMode::Damage { gain } => gain,
            ActuatorMode::Jitter { fault_gain, on_s, off_s } => {
                // the epsilon keeps tick times that land on a boundary on the same side every period
                let phase = ((t - self.onset).max(0.0) + 1e-9) % (on_s + off_s);
                if phase < on_s {
                    fault_gain
                } else {
                    1.0
                }
            }
        }
    }

    pub fn d(&self, _t: f64) -> f64 {
        match self.mode {
            ActuatorMode::ConstantDeviation { bias } => bias,
            ActuatorMode::Stuck => self.latched,
            ActuatorMode::Loose { .. } => self.wander,
            _ => 0.0,
        }
    }
}

/// `u_m(t) = k(t) u_c(t) + d(t)`.
pub fn apply_actuator_fault(u_c: f64, fault: &ActuatorFaultState, t: f64) -> f64 {
    fault.k(t) * u_c + fault.d(t)
}

pub(crate) fn mode_error(index: usize, label: &str, reason: impl Into<String>) -> Error {
    Error::FaultSpec {
        index,
        label: label.to_string(),
        reason: reason.into(),
    }
}

pub(crate) fn check(index: usize, label: &str, r: std::result::Result<(), String>) -> Result<()> {
    r.map_err(|e| mode_error(index, label, e))
}
