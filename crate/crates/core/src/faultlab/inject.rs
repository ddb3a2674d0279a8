use super::algebra::{apply_actuator_fault, apply_sensor_fault, ActuatorFaultState, ActuatorMode, ImuChannel, SensorFaultState, SensorMode};
use super::spec::{FaultMode, FaultSchedule, FaultSpec, FaultTarget, GpsMode, PhaseEntries};
use crate::autopilot::{ControlCommand, Phase};
use crate::avionics::{gaussian, rng_stream, wrap_angle, GpsReading, ImuReading, SensorRng, FAULT_STREAM};

/// Applies a GPS spec to a reading. `None` means no reading is delivered.
/// Specs aimed at other targets leave the reading untouched.
pub fn gps_fault_transform(reading: GpsReading, spec: &FaultSpec) -> Option<GpsReading> {
    let FaultMode::Gps(mode) = spec.mode else {
        return Some(reading);
    };
    let mut r = reading;
    match mode {
        GpsMode::Deception { offset_deg } => {
            r.latitude_deg += offset_deg;
            r.longitude_deg += offset_deg;
        }
        GpsMode::Satellites { satellites } => r.set_satellites(satellites),
        GpsMode::Interruption => return None,
    }
    Some(r)
}

fn imu_get(r: &ImuReading, c: ImuChannel) -> f64 {
    match c {
        ImuChannel::Roll => r.attitude.x,
        ImuChannel::Pitch => r.attitude.y,
        ImuChannel::Yaw => r.attitude.z,
        ImuChannel::RollRate => r.rates.x,
        ImuChannel::PitchRate => r.rates.y,
        ImuChannel::YawRate => r.rates.z,
        ImuChannel::AccelX => r.accel.x,
        ImuChannel::AccelY => r.accel.y,
        ImuChannel::AccelZ => r.accel.z,
    }
}

fn imu_set(r: &mut ImuReading, c: ImuChannel, v: f64) {
    match c {
        ImuChannel::Roll => r.attitude.x = v,
        ImuChannel::Pitch => r.attitude.y = v,
        ImuChannel::Yaw => r.attitude.z = wrap_angle(v),
        ImuChannel::RollRate => r.rates.x = v,
        ImuChannel::PitchRate => r.rates.y = v,
        ImuChannel::YawRate => r.rates.z = v,
        ImuChannel::AccelX => r.accel.x = v,
        ImuChannel::AccelY => r.accel.y = v,
        ImuChannel::AccelZ => r.accel.z = v,
    }
}

/// Per-run injection state: phase entries for anchored onsets, servo latches
/// and loose-servo wander.
#[derive(Debug, Clone)]
pub struct FaultInjector {
    schedule: FaultSchedule,
    entries: PhaseEntries,
    servo_states: Vec<Option<ActuatorFaultState>>,
    active: Vec<usize>,
    rng: SensorRng,
}

impl FaultInjector {
    pub fn new(schedule: FaultSchedule, seed: u64) -> Self {
        let n = schedule.specs().len();
        FaultInjector {
            schedule,
            entries: PhaseEntries::default(),
            servo_states: vec![None; n],
            active: Vec::new(),
            rng: rng_stream(seed, FAULT_STREAM),
        }
    }

    pub fn schedule(&self) -> &FaultSchedule {
        &self.schedule
    }

    pub fn phase_entries(&self) -> &PhaseEntries {
        &self.entries
    }

    pub fn record_phase(&mut self, phase: Phase, t: f64) {
        self.entries.record(phase, t);
    }

    /// Refreshes the active set for time `t`.
    pub fn begin_tick(&mut self, t: f64) {
        self.active = self.schedule.active_indices(t, &self.entries);
    }

    pub fn active(&self) -> impl Iterator<Item = &FaultSpec> {
        self.active.iter().map(|&i| &self.schedule.specs()[i])
    }

    /// Labels of the active specs as `label@target`.
    pub fn labels(&self) -> Vec<String> {
        self.active().map(|s| format!("{}@{}", s.label, s.target)).collect()
    }

    pub fn apply_imu(&self, reading: &ImuReading, t: f64) -> ImuReading {
        let mut out = *reading;
        for &i in &self.active {
            let spec = &self.schedule.specs()[i];
            let (FaultTarget::Imu(ch), FaultMode::Sensor(mode)) = (spec.target, &spec.mode) else {
                continue;
            };
            let state = SensorFaultState {
                channel: ch,
                mode: mode.clone(),
                onset: spec.onset(&self.entries).unwrap_or(t),
            };
            let y = imu_get(&out, ch);
            imu_set(&mut out, ch, apply_sensor_fault(y, &state, t));
            if matches!(mode, SensorMode::Disconnect) {
                out.healthy = false;
            }
        }
        out
    }

    pub fn apply_gps(&self, reading: Option<GpsReading>) -> Option<GpsReading> {
        let mut r = reading?;
        for &i in &self.active {
            let spec = &self.schedule.specs()[i];
            if spec.target == FaultTarget::Gps {
                r = gps_fault_transform(r, spec)?;
            }
        }
        Some(r)
    }

    /// Faults the command on its way to the servos. `positions` are the
    /// current actual surface positions, used to latch stuck faults.
    pub fn apply_servo(&mut self, command: &ControlCommand, positions: &[f64; 3], t: f64, dt: f64) -> ControlCommand {
        let mut out = *command;
        for &i in &self.active {
            let spec = &self.schedule.specs()[i];
            let (FaultTarget::Servo(ch), FaultMode::Actuator(mode)) = (spec.target, &spec.mode) else {
                continue;
            };
            let onset = spec.onset(&self.entries).unwrap_or(t);
            let state = self.servo_states[i]
                .get_or_insert_with(|| ActuatorFaultState::new(ch, *mode, onset, positions[ch.index()]));
            if let ActuatorMode::Loose { sigma, tau_s, .. } = *mode {
                let a = (-dt / tau_s).exp();
                state.wander = state.wander * a + gaussian(&mut self.rng, sigma * (1.0 - a * a).sqrt());
            }
            out.set(ch, apply_actuator_fault(command.get(ch), state, t));
        }
        out
    }
}
