use std::path::Path;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::scenario::Scenario;
use super::telemetry::{write_telemetry, TelemetryFrame};
use crate::autopilot::{
    failsafe_step, phase_step, Autopilot, FailsafeMode, FlightPhase, GpsMonitor, ImuMonitor, TrimPoint,
};
use crate::avionics::{
    gps_measure, imu_measure, rng_stream, servo_dynamics, GpsReading, NavSolution, Navigator, ServoState,
    SurfaceActual, GPS_STREAM, IMU_STREAM,
};
use crate::error::{Error, Result};
use crate::faultlab::FaultInjector;
use crate::flightdyn::{aircraft_loads, integrate_step, trim, RigidBodyState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Termination {
    Completed,
    GroundImpact,
    Diverged { message: String },
}

impl Termination {
    pub fn name(&self) -> &'static str {
        match self {
            Termination::Completed => "completed",
            Termination::GroundImpact => "ground_impact",
            Termination::Diverged { .. } => "diverged",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub t: f64,
    pub kind: String,
    pub from: String,
    pub to: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub scenario: String,
    pub seed: u64,
    pub termination: Termination,
    pub end_time: f64,
    pub final_state: RigidBodyState,
    pub initial_airspeed: f64,
    pub final_airspeed: f64,
    pub max_airspeed: f64,
    pub transitions: Vec<Transition>,
    pub fault_onsets: Vec<(String, f64)>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub frames: Vec<TelemetryFrame>,
    pub summary: RunSummary,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunOptions {
    /// Skip the fault layer entirely (reference runs).
    pub bypass_faults: bool,
}

pub fn run_simulation(scenario: &Scenario) -> Result<RunOutput> {
    run_simulation_with(scenario, &RunOptions::default())
}

/// Closed-loop run. Each control tick: sense, inject sensor faults, monitor
/// and navigate, step the phase and failsafe machines, run the autopilot,
/// inject servo faults, then advance servos and airframe over the physics
/// substeps.
pub fn run_simulation_with(scenario: &Scenario, options: &RunOptions) -> Result<RunOutput> {
    let f = &scenario.file;
    let cfg = &scenario.aircraft;
    let timing = f.timing;
    let init = f.initial;

    let (trim_state, trim_cmd) = trim(cfg, init.altitude_m, init.airspeed_mps)?;
    let mut state = trim_state.with_heading(init.heading_deg.to_radians());
    state.position.x = init.north_m;
    state.position.y = init.east_m;
    let trim_point = TrimPoint {
        command: trim_cmd,
        pitch: trim_state.pitch(),
    };

    let mut imu_rng = rng_stream(f.seed, IMU_STREAM);
    let mut gps_rng = rng_stream(f.seed, GPS_STREAM);
    let mut injector = FaultInjector::new(scenario.schedule.clone(), f.seed);
    let origin = f.sensors.origin;
    let start_nav = NavSolution::from_truth(&state);
    let mut navigator = Navigator::new(origin, start_nav);
    let mut gps_monitor = GpsMonitor::new(origin, 0.0);
    let mut imu_monitor = ImuMonitor::new();
    let mut autopilot = Autopilot::new(f.gains, f.failsafe, trim_point, &start_nav);
    let mut servo = ServoState::settled_at(&trim_cmd);
    let mut actual = SurfaceActual::from(trim_cmd);
    let mut phase = FlightPhase::new(init.phase, 0.0, init.altitude_m);
    let mut failsafe = FailsafeMode::Nominal;
    injector.record_phase(phase.phase, 0.0);

    let substeps = timing.substeps();
    let dt = timing.physics_dt_s;
    let dtc = timing.control_dt();
    let rate = timing.control_rate_hz as f64;
    let log_dec = timing.log_decimation();
    let gps_dec = timing.gps_decimation();
    let ticks = (f.duration_s * rate).round() as usize;

    let mut frames = Vec::with_capacity(ticks / log_dec + 1);
    let mut transitions = Vec::new();
    let mut onsets: Vec<(String, f64)> = Vec::new();
    let mut pending_gps: Option<GpsReading> = None;
    let initial_airspeed = state.airspeed();
    let mut max_airspeed = initial_airspeed;
    let mut termination = Termination::Completed;

    'ticks: for n in 0..ticks {
        let t = n as f64 / rate;
        if let Some(end) = f.end_after {
            if injector.phase_entries().get(end.phase).is_some_and(|e| t >= e + end.after_s - 1e-9) {
                break;
            }
        }

        // sense
        let loads = aircraft_loads(&state, &actual, cfg)?;
        let specific_force: Vector3<f64> = loads.force / cfg.mass;
        let mut imu = imu_measure(&state, &specific_force, &f.sensors.imu, &mut imu_rng);
        let mut gps = (n % gps_dec == 0).then(|| gps_measure(&state, &origin, &f.sensors.gps, &mut gps_rng));

        // inject sensor faults
        if !options.bypass_faults {
            injector.begin_tick(t);
            imu = injector.apply_imu(&imu, t);
            gps = injector.apply_gps(gps);
            for s in injector.active() {
                if !onsets.iter().any(|(l, _)| *l == s.label) {
                    onsets.push((s.label.clone(), t));
                }
            }
        }
        if gps.is_some() {
            pending_gps = gps;
        }

        // monitor, failsafe, navigate
        let gps_valid = gps_monitor.update(gps.as_ref(), t, &f.failsafe);
        let imu_ok = imu_monitor.update(&imu, &f.failsafe);
        let next_fs = failsafe_step(failsafe, gps_valid, imu_ok, t, &f.failsafe);
        if next_fs != failsafe {
            transitions.push(Transition {
                t,
                kind: "failsafe".into(),
                from: failsafe.name().into(),
                to: next_fs.name().into(),
            });
            failsafe = next_fs;
        }
        let aided = gps_valid && failsafe == FailsafeMode::Nominal;
        let mut nav = *navigator.update(&imu, gps.as_ref(), aided, dtc);
        nav.time = t;

        let next_phase = phase_step(phase, &nav, &f.mission);
        if next_phase.phase != phase.phase {
            transitions.push(Transition {
                t,
                kind: "phase".into(),
                from: phase.phase.name().into(),
                to: next_phase.phase.name().into(),
            });
            injector.record_phase(next_phase.phase, t);
        }
        phase = next_phase;

        // control
        let command = autopilot.update(&nav, &f.mission, &phase, failsafe, dtc);
        let faulted = if options.bypass_faults {
            command
        } else {
            injector.apply_servo(&command, &servo.positions, t, dtc)
        };

        if n % log_dec == 0 {
            frames.push(TelemetryFrame {
                t,
                truth: state,
                imu,
                gps: pending_gps.take(),
                nav,
                phase: phase.phase,
                failsafe,
                command,
                actual,
                pitch_target: autopilot.pitch_target(),
                labels: if options.bypass_faults { Vec::new() } else { injector.labels() },
            });
        }

        // actuate and integrate
        for _ in 0..substeps {
            actual = servo_dynamics(&faulted, &mut servo, &f.servo, dt);
            match integrate_step(&state, cfg, dt, |s| aircraft_loads(s, &actual, cfg)) {
                Ok(next) => state = next,
                Err(Error::Diverged { reason, .. }) => {
                    termination = Termination::Diverged { message: reason };
                    break 'ticks;
                }
                Err(e) => return Err(e),
            }
            max_airspeed = max_airspeed.max(state.airspeed());
            if state.altitude() <= 0.0 && state.velocity_ned().z > 0.0 {
                termination = Termination::GroundImpact;
                break 'ticks;
            }
        }
    }

    let summary = RunSummary {
        scenario: f.name.clone(),
        seed: f.seed,
        termination,
        end_time: state.time,
        final_state: state,
        initial_airspeed,
        final_airspeed: state.airspeed(),
        max_airspeed,
        transitions,
        fault_onsets: onsets,
    };
    Ok(RunOutput { frames, summary })
}

/// Writes `telemetry.csv`, `summary.json` and `scenario.json` into `dir`.
pub fn write_run(output: &RunOutput, scenario: &Scenario, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let csv_path = dir.join("telemetry.csv");
    let file = std::fs::File::create(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
    write_telemetry(output.frames.iter().map(TelemetryFrame::to_row), std::io::BufWriter::new(file))?;
    write_json(&dir.join("summary.json"), &output.summary)?;
    write_json(&dir.join("scenario.json"), &scenario.file)?;
    Ok(())
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

