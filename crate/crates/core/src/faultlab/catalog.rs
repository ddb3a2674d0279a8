use serde::{Deserialize, Serialize};

use super::algebra::{ActuatorMode, ImuChannel, Pulse, SensorMode};
use super::spec::{FaultMode, FaultSpec, FaultStart, FaultTarget, GpsMode};
use crate::avionics::ServoChannel;

fn deg(x: f64) -> f64 {
    x.to_radians()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaultLocation {
    None,
    Gps,
    Imu,
    Actuator,
}

impl FaultLocation {
    pub fn name(self) -> &'static str {
        match self {
            FaultLocation::None => "none",
            FaultLocation::Gps => "gps",
            FaultLocation::Imu => "imu",
            FaultLocation::Actuator => "actuator",
        }
    }
}

/// Named faults of the injection catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaultKind {
    GpsDeception,
    GpsWeakSignal,
    GpsWeakerSignal,
    GpsInterruption,
    ImuMultiplicative,
    ImuConstantDeviation,
    ImuDrift,
    ImuTransientDrift,
    ImuDisconnect,
    ServoConstantDeviation,
    ServoStuck,
    ServoLoose,
    ServoDamage,
    ServoJitter,
}

impl FaultKind {
    pub const ALL: [FaultKind; 14] = [
        FaultKind::GpsDeception,
        FaultKind::GpsWeakSignal,
        FaultKind::GpsWeakerSignal,
        FaultKind::GpsInterruption,
        FaultKind::ImuMultiplicative,
        FaultKind::ImuConstantDeviation,
        FaultKind::ImuDrift,
        FaultKind::ImuTransientDrift,
        FaultKind::ImuDisconnect,
        FaultKind::ServoConstantDeviation,
        FaultKind::ServoStuck,
        FaultKind::ServoLoose,
        FaultKind::ServoDamage,
        FaultKind::ServoJitter,
    ];

    /// The thirteen kinds of the standard campaign (four GPS, four IMU, five
    /// servo).
    pub const CAMPAIGN: [FaultKind; 13] = [
        FaultKind::GpsDeception,
        FaultKind::GpsWeakSignal,
        FaultKind::GpsWeakerSignal,
        FaultKind::GpsInterruption,
        FaultKind::ImuMultiplicative,
        FaultKind::ImuConstantDeviation,
        FaultKind::ImuDrift,
        FaultKind::ImuDisconnect,
        FaultKind::ServoConstantDeviation,
        FaultKind::ServoStuck,
        FaultKind::ServoLoose,
        FaultKind::ServoDamage,
        FaultKind::ServoJitter,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FaultKind::GpsDeception => "gps_deception",
            FaultKind::GpsWeakSignal => "gps_weak_signal",
            FaultKind::GpsWeakerSignal => "gps_weaker_signal",
            FaultKind::GpsInterruption => "gps_interruption",
            FaultKind::ImuMultiplicative => "imu_multiplicative",
            FaultKind::ImuConstantDeviation => "imu_constant_deviation",
            FaultKind::ImuDrift => "imu_drift",
            FaultKind::ImuTransientDrift => "imu_transient_drift",
            FaultKind::ImuDisconnect => "imu_disconnect",
            FaultKind::ServoConstantDeviation => "servo_constant_deviation",
            FaultKind::ServoStuck => "servo_stuck",
            FaultKind::ServoLoose => "servo_loose",
            FaultKind::ServoDamage => "servo_damage",
            FaultKind::ServoJitter => "servo_jitter",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    pub fn location(self) -> FaultLocation {
        match self {
            FaultKind::GpsDeception | FaultKind::GpsWeakSignal | FaultKind::GpsWeakerSignal | FaultKind::GpsInterruption => {
                FaultLocation::Gps
            }
            FaultKind::ImuMultiplicative
            | FaultKind::ImuConstantDeviation
            | FaultKind::ImuDrift
            | FaultKind::ImuTransientDrift
            | FaultKind::ImuDisconnect => FaultLocation::Imu,
            _ => FaultLocation::Actuator,
        }
    }

    /// Catalog specs for this kind, all sharing the given onset and duration.
    pub fn specs(self, start: FaultStart, duration_s: f64) -> Vec<FaultSpec> {
        let label = self.name();
        let mk = |target, mode| FaultSpec::new(label, target, mode, start, duration_s);
        match self.location() {
            FaultLocation::Gps => vec![mk(FaultTarget::Gps, FaultMode::Gps(gps_fault_params(self)))],
            FaultLocation::Imu => imu_fault_params(self)
                .into_iter()
                .map(|(c, m)| mk(FaultTarget::Imu(c), FaultMode::Sensor(m)))
                .collect(),
            FaultLocation::Actuator => servo_fault_params(self)
                .into_iter()
                .map(|(c, m)| mk(FaultTarget::Servo(c), FaultMode::Actuator(m)))
                .collect(),
            FaultLocation::None => Vec::new(),
        }
    }
}

/// GPS catalog: 0.05 deg position shift, 12 and 7 satellites, no signal.
pub fn gps_fault_params(kind: FaultKind) -> GpsMode {
    match kind {
        FaultKind::GpsDeception => GpsMode::Deception { offset_deg: 0.05 },
        FaultKind::GpsWeakSignal => GpsMode::Satellites { satellites: 12 },
        FaultKind::GpsWeakerSignal => GpsMode::Satellites { satellites: 7 },
        _ => GpsMode::Interruption,
    }
}

/// IMU catalog templates as (channel, mode) pairs. A disconnect covers every
/// channel; the injector also clears the health flag for it.
pub fn imu_fault_params(kind: FaultKind) -> Vec<(ImuChannel, SensorMode)> {
    use ImuChannel::*;
    match kind {
        FaultKind::ImuMultiplicative => [Roll, Yaw, RollRate, YawRate]
            .into_iter()
            .map(|c| (c, SensorMode::Multiplicative { gain: 1.25 }))
            .collect(),
        FaultKind::ImuConstantDeviation => vec![
            (Roll, SensorMode::ConstantDeviation { bias: deg(3.0) }),
            (Yaw, SensorMode::ConstantDeviation { bias: deg(5.0) }),
        ],
        FaultKind::ImuDrift => [Roll, Pitch]
            .into_iter()
            .map(|c| {
                (
                    c,
                    SensorMode::Drift {
                        rate: deg(0.5),
                        ramp_s: 40.0,
                    },
                )
            })
            .collect(),
        FaultKind::ImuTransientDrift => {
            let pulses: Vec<Pulse> = [0.0, 4.0, 8.0]
                .into_iter()
                .map(|offset_s| Pulse {
                    offset_s,
                    width_s: 0.5,
                    amplitude: deg(2.0),
                })
                .collect();
            [Roll, Pitch]
                .into_iter()
                .map(|c| (c, SensorMode::TransientDrift { pulses: pulses.clone() }))
                .collect()
        }
        FaultKind::ImuDisconnect => ImuChannel::ALL.into_iter().map(|c| (c, SensorMode::Disconnect)).collect(),
        _ => Vec::new(),
    }
}

/// Servo catalog templates, applied to every surface.
pub fn servo_fault_params(kind: FaultKind) -> Vec<(ServoChannel, ActuatorMode)> {
    let mode = match kind {
        FaultKind::ServoConstantDeviation => ActuatorMode::ConstantDeviation { bias: deg(-2.0) },
        FaultKind::ServoStuck => ActuatorMode::Stuck,
        FaultKind::ServoLoose => ActuatorMode::Loose {
            gain: 0.9,
            sigma: deg(1.0),
            tau_s: 0.5,
        },
        FaultKind::ServoDamage => ActuatorMode::Damage { gain: 0.8 },
        FaultKind::ServoJitter => ActuatorMode::Jitter {
            fault_gain: 0.0,
            on_s: 0.2,
            off_s: 0.2,
        },
        _ => return Vec::new(),
    };
    ServoChannel::ALL.into_iter().map(|c| (c, mode)).collect()
}
