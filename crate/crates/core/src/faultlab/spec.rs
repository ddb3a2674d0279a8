use std::fmt;

use serde::{Deserialize, Serialize};

use super::algebra::{check, mode_error, ActuatorMode, ImuChannel, Pulse, SensorMode};
use crate::autopilot::Phase;
use crate::avionics::ServoChannel;
use crate::error::Result;

/// Where a fault acts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FaultTarget {
    Imu(ImuChannel),
    Servo(ServoChannel),
    /// The GPS receiver as a whole.
    Gps,
}

impl fmt::Display for FaultTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FaultTarget::Imu(c) => write!(f, "imu.{}", c.name()),
            FaultTarget::Servo(c) => write!(f, "servo.{}", c.name()),
            FaultTarget::Gps => f.write_str("gps"),
        }
    }
}

impl FaultTarget {
    pub fn parse(s: &str) -> Option<Self> {
        if s == "gps" {
            return Some(FaultTarget::Gps);
        }
        let (sys, ch) = s.split_once('.')?;
        match sys {
            "imu" => ImuChannel::from_name(ch).map(FaultTarget::Imu),
            "servo" => ServoChannel::ALL.into_iter().find(|c| c.name() == ch).map(FaultTarget::Servo),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GpsMode {
    /// Latitude and longitude both shifted by `offset_deg`.
    Deception { offset_deg: f64 },
    /// Satellite count forced to `satellites`.
    Satellites { satellites: u32 },
    /// No reading delivered.
    Interruption,
}

impl GpsMode {
    pub fn name(&self) -> &'static str {
        match self {
            GpsMode::Deception { .. } => "deception",
            GpsMode::Satellites { .. } => "satellites",
            GpsMode::Interruption => "interruption",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FaultMode {
    Sensor(SensorMode),
    Actuator(ActuatorMode),
    Gps(GpsMode),
}

impl FaultMode {
    pub fn name(&self) -> &'static str {
        match self {
            FaultMode::Sensor(m) => m.name(),
            FaultMode::Actuator(m) => m.name(),
            FaultMode::Gps(m) => m.name(),
        }
    }
}

/// Onset reference: an absolute mission time or a mission phase entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FaultStart {
    At(f64),
    PhaseEntry { phase: Phase, offset_s: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultSpec {
    pub label: String,
    pub target: FaultTarget,
    pub mode: FaultMode,
    pub start: FaultStart,
    /// Seconds; may be infinite.
    pub duration_s: f64,
}

impl FaultSpec {
    pub fn new(label: impl Into<String>, target: FaultTarget, mode: FaultMode, start: FaultStart, duration_s: f64) -> Self {
        FaultSpec {
            label: label.into(),
            target,
            mode,
            start,
            duration_s,
        }
    }

    pub fn validate(&self, index: usize) -> Result<()> {
        let err = |r: &str| mode_error(index, &self.label, r);
        match self.start {
            FaultStart::At(t) if !(t >= 0.0) || !t.is_finite() => return Err(err("start must be finite and >= 0")),
            FaultStart::PhaseEntry { offset_s, .. } if !(offset_s >= 0.0) || !offset_s.is_finite() => {
                return Err(err("phase offset must be finite and >= 0"))
            }
            _ => {}
        }
        if !(self.duration_s > 0.0) {
            return Err(err("duration must be > 0"));
        }
        match (&self.target, &self.mode) {
            (FaultTarget::Imu(_), FaultMode::Sensor(m)) => check(index, &self.label, m.validate()),
            (FaultTarget::Servo(_), FaultMode::Actuator(m)) => check(index, &self.label, m.validate()),
            (FaultTarget::Gps, FaultMode::Gps(m)) => match m {
                GpsMode::Deception { offset_deg } if !offset_deg.is_finite() || *offset_deg == 0.0 => {
                    Err(err("deception needs a finite non-zero offset"))
                }
                _ => Ok(()),
            },
            _ => Err(err(&format!("mode {} cannot act on {}", self.mode.name(), self.target))),
        }
    }

    /// Onset time given the phase entry times seen so far.
    pub fn onset(&self, phase_entries: &PhaseEntries) -> Option<f64> {
        match self.start {
            FaultStart::At(t) => Some(t),
            FaultStart::PhaseEntry { phase, offset_s } => phase_entries.get(phase).map(|t| t + offset_s),
        }
    }

    /// Active on `[onset, onset + duration)`.
    pub fn active_at(&self, t: f64, phase_entries: &PhaseEntries) -> bool {
        self.onset(phase_entries).is_some_and(|s| s <= t && t < s + self.duration_s)
    }
}

/// First entry time of each mission phase.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhaseEntries([Option<f64>; 4]);

impl PhaseEntries {
    pub fn get(&self, phase: Phase) -> Option<f64> {
        self.0[phase as usize]
    }

    /// Records the entry if this phase was not entered before.
    pub fn record(&mut self, phase: Phase, t: f64) {
        self.0[phase as usize].get_or_insert(t);
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FaultSchedule {
    specs: Vec<FaultSpec>,
}

impl FaultSchedule {
    /// Validates every spec, rejects overlaps on a channel, and rejects a
    /// channel whose specs use different onset anchors (their overlap could
    /// not be decided before flight).
    pub fn new(specs: Vec<FaultSpec>) -> Result<Self> {
        for (i, s) in specs.iter().enumerate() {
            s.validate(i)?;
        }
        for (j, b) in specs.iter().enumerate() {
            for a in &specs[..j] {
                if a.target != b.target {
                    continue;
                }
                let window = |s: &FaultSpec| match s.start {
                    FaultStart::At(t) => (None, t, t + s.duration_s),
                    FaultStart::PhaseEntry { phase, offset_s } => (Some(phase), offset_s, offset_s + s.duration_s),
                };
                let (pa, sa, ea) = window(a);
                let (pb, sb, eb) = window(b);
                if pa != pb {
                    return Err(mode_error(j, &b.label, format!("{} mixes onset anchors with {:?}", b.target, a.label)));
                }
                if sa < eb && sb < ea {
                    return Err(mode_error(j, &b.label, format!("overlaps {:?} on {}", a.label, b.target)));
                }
            }
        }
        Ok(FaultSchedule { specs })
    }

    pub fn empty() -> Self {
        FaultSchedule::default()
    }

    pub fn specs(&self) -> &[FaultSpec] {
        &self.specs
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }

    /// Indices of the specs active at `t`.
    pub fn active_indices(&self, t: f64, phase_entries: &PhaseEntries) -> Vec<usize> {
        (0..self.specs.len()).filter(|&i| self.specs[i].active_at(t, phase_entries)).collect()
    }
}

/// Specs active at `t` among those with absolute onsets (phase-anchored specs
/// need [`FaultSchedule::active_indices`] with the recorded phase entries).
pub fn schedule_active(schedule: &FaultSchedule, t: f64) -> Vec<&FaultSpec> {
    let none = PhaseEntries::default();
    schedule.specs.iter().filter(|s| s.active_at(t, &none)).collect()
}

/// A fault as written in a scenario file. Angular quantities are in degrees
/// (deg/s for rates); everything else is SI.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultEntry {
    /// Expands to the catalog specs of a named fault kind.
    pub catalog: Option<String>,
    pub target: Option<String>,
    pub mode: Option<String>,
    pub label: Option<String>,
    pub start_s: Option<f64>,
    pub phase: Option<Phase>,
    pub offset_s: Option<f64>,
    pub duration_s: Option<f64>,
    pub gain: Option<f64>,
    pub bias: Option<f64>,
    pub rate: Option<f64>,
    pub ramp_s: Option<f64>,
    /// `[offset_s, width_s, amplitude]` triples.
    pub pulses: Option<Vec<[f64; 3]>>,
    pub sigma: Option<f64>,
    pub tau_s: Option<f64>,
    pub on_s: Option<f64>,
    pub off_s: Option<f64>,
    pub satellites: Option<u32>,
    pub offset_deg: Option<f64>,
}

impl FaultEntry {
    fn start(&self, index: usize, label: &str) -> Result<FaultStart> {
        match (self.start_s, self.phase) {
            (Some(t), None) => Ok(FaultStart::At(t)),
            (None, Some(phase)) => Ok(FaultStart::PhaseEntry {
                phase,
                offset_s: self.offset_s.unwrap_or(0.0),
            }),
            (None, None) => Err(mode_error(index, label, "needs start_s or phase")),
            (Some(_), Some(_)) => Err(mode_error(index, label, "start_s and phase are exclusive")),
        }
    }

    /// Converts to validated specs. `index` is the entry's position in the
    /// file and is used in error messages.
    pub fn to_specs(&self, index: usize) -> Result<Vec<FaultSpec>> {
        let label = self.label.clone().unwrap_or_else(|| {
            self.catalog
                .clone()
                .unwrap_or_else(|| format!("{}:{}", self.target.as_deref().unwrap_or("?"), self.mode.as_deref().unwrap_or("?")))
        });
        let start = self.start(index, &label)?;
        let duration = self.duration_s.unwrap_or(f64::INFINITY);
        if let Some(name) = &self.catalog {
            let kind = super::FaultKind::from_name(name)
                .ok_or_else(|| mode_error(index, &label, format!("unknown catalog fault {name:?}")))?;
            if self.target.is_some() || self.mode.is_some() {
                return Err(mode_error(index, &label, "catalog entries take no target or mode"));
            }
            let specs = kind.specs(start, duration);
            for s in &specs {
                s.validate(index)?;
            }
            return Ok(specs);
        }
        let target_name = self.target.as_deref().ok_or_else(|| mode_error(index, &label, "missing target"))?;
        let target = FaultTarget::parse(target_name)
            .ok_or_else(|| mode_error(index, &label, format!("unknown target {target_name:?}")))?;
        let mode_name = self.mode.as_deref().ok_or_else(|| mode_error(index, &label, "missing mode"))?;
        let need = |v: Option<f64>, what: &str| v.ok_or_else(|| mode_error(index, &label, format!("mode {mode_name} needs {what}")));
        let mode = match target {
            FaultTarget::Imu(ch) => {
                let s = ch.unit_scale();
                FaultMode::Sensor(match mode_name {
                    "fault_free" => SensorMode::FaultFree,
                    "multiplicative" => SensorMode::Multiplicative { gain: need(self.gain, "gain")? },
                    "constant_deviation" => SensorMode::ConstantDeviation { bias: need(self.bias, "bias")? * s },
                    "drift" => SensorMode::Drift {
                        rate: need(self.rate, "rate")? * s,
                        ramp_s: self.ramp_s.unwrap_or(40.0),
                    },
                    "transient_drift" => SensorMode::TransientDrift {
                        pulses: self
                            .pulses
                            .as_ref()
                            .ok_or_else(|| mode_error(index, &label, "transient_drift needs pulses"))?
                            .iter()
                            .map(|[o, w, a]| Pulse { offset_s: *o, width_s: *w, amplitude: a * s })
                            .collect(),
                    },
                    "disconnect" => SensorMode::Disconnect,
                    other => return Err(mode_error(index, &label, format!("unknown sensor mode {other:?}"))),
                })
            }
            FaultTarget::Servo(_) => {
                let s = std::f64::consts::PI / 180.0;
                FaultMode::Actuator(match mode_name {
                    "fault_free" => ActuatorMode::FaultFree,
                    "constant_deviation" => ActuatorMode::ConstantDeviation { bias: need(self.bias, "bias")? * s },
                    "stuck" => ActuatorMode::Stuck,
                    "loose" => ActuatorMode::Loose {
                        gain: self.gain.unwrap_or(0.9),
                        sigma: self.sigma.unwrap_or(1.0) * s,
                        tau_s: self.tau_s.unwrap_or(0.5),
                    },
                    "damage" => ActuatorMode::Damage { gain: need(self.gain, "gain")? },
                    "jitter" => ActuatorMode::Jitter {
                        fault_gain: self.gain.unwrap_or(0.0),
                        on_s: self.on_s.unwrap_or(0.2),
                        off_s: self.off_s.unwrap_or(0.2),
                    },
                    other => return Err(mode_error(index, &label, format!("unknown servo mode {other:?}"))),
                })
            }
            FaultTarget::Gps => FaultMode::Gps(match mode_name {
                "deception" => GpsMode::Deception {
                    offset_deg: self.offset_deg.unwrap_or(0.05),
                },
                "satellites" => GpsMode::Satellites {
                    satellites: self
                        .satellites
                        .ok_or_else(|| mode_error(index, &label, "satellites mode needs satellites"))?,
                },
                "interruption" => GpsMode::Interruption,
                other => return Err(mode_error(index, &label, format!("unknown gps mode {other:?}"))),
            }),
        };
        let spec = FaultSpec::new(label, target, mode, start, duration);
        spec.validate(index)?;
        Ok(vec![spec])
    }
}

/// Builds a schedule from file entries.
pub fn schedule_from_entries(entries: &[FaultEntry]) -> Result<FaultSchedule> {
    let mut specs = Vec::new();
    for (i, e) in entries.iter().enumerate() {
        specs.extend(e.to_specs(i)?);
    }
    FaultSchedule::new(specs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stuck_at(label: &str, start: f64, duration: f64) -> FaultSpec {
        FaultSpec::new(
            label,
            FaultTarget::Servo(ServoChannel::Elevator),
            FaultMode::Actuator(ActuatorMode::Stuck),
            FaultStart::At(start),
            duration,
        )
    }

    #[test]
    fn empty_schedule_has_no_active() {
        assert!(schedule_active(&FaultSchedule::empty(), 5.0).is_empty());
    }

    #[test]
    fn start_boundary_inclusive() {
        let s = FaultSchedule::new(vec![stuck_at("a", 100.0, f64::INFINITY)]).unwrap();
        assert!(schedule_active(&s, 99.999).is_empty());
        assert_eq!(schedule_active(&s, 100.0).len(), 1);
    }

    #[test]
    fn disjoint_specs() {
        let s = FaultSchedule::new(vec![stuck_at("a", 10.0, 5.0), stuck_at("b", 30.0, 5.0)]).unwrap();
        assert_eq!(schedule_active(&s, 12.0)[0].label, "a");
        assert!(schedule_active(&s, 20.0).is_empty());
        assert!(schedule_active(&s, 15.0).is_empty());
    }

    #[test]
    fn overlap_rejected() {
        assert!(FaultSchedule::new(vec![stuck_at("a", 10.0, 5.0), stuck_at("b", 14.0, 5.0)]).is_err());
        // different channels may overlap
        let mut b = stuck_at("b", 14.0, 5.0);
        b.target = FaultTarget::Servo(ServoChannel::Rudder);
        assert!(FaultSchedule::new(vec![stuck_at("a", 10.0, 5.0), b]).is_ok());
    }

    #[test]
    fn mixed_anchor_rejected() {
        let mut b = stuck_at("b", 0.0, 5.0);
        b.start = FaultStart::PhaseEntry {
            phase: Phase::GlideSlope,
            offset_s: 30.0,
        };
        assert!(FaultSchedule::new(vec![stuck_at("a", 10.0, 5.0), b]).is_err());
    }

    #[test]
    fn target_mode_mismatch_rejected() {
        let s = FaultSpec::new(
            "x",
            FaultTarget::Gps,
            FaultMode::Actuator(ActuatorMode::Stuck),
            FaultStart::At(0.0),
            1.0,
        );
        assert!(s.validate(0).is_err());
    }

    #[test]
    fn phase_anchor_resolves() {
        let s = FaultSpec::new(
            "x",
            FaultTarget::Gps,
            FaultMode::Gps(GpsMode::Interruption),
            FaultStart::PhaseEntry {
                phase: Phase::GlideSlope,
                offset_s: 30.0,
            },
            f64::INFINITY,
        );
        let mut e = PhaseEntries::default();
        assert!(!s.active_at(500.0, &e));
        e.record(Phase::GlideSlope, 200.0);
        e.record(Phase::GlideSlope, 300.0);
        assert!(!s.active_at(229.99, &e));
        assert!(s.active_at(230.0, &e));
    }

    #[test]
    fn entry_parsing_and_units() {
        let e: FaultEntry = toml::from_str(
            "target = \"imu.roll\"\nmode = \"constant_deviation\"\nbias = 3.0\nstart_s = 10.0\n",
        )
        .unwrap();
        let specs = e.to_specs(0).unwrap();
        assert_eq!(specs[0].mode, FaultMode::Sensor(SensorMode::ConstantDeviation { bias: 3f64.to_radians() }));
        assert_eq!(specs[0].duration_s, f64::INFINITY);
        let bad: FaultEntry = toml::from_str("target = \"servo.elevator\"\nmode = \"damage\"\ngain = 1.5\nstart_s = 1.0\n").unwrap();
        assert!(bad.to_specs(3).is_err());
    }
}
