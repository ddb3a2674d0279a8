//! Sliding-window feature extraction.
//!
//! Angles in features are in degrees, rates in deg/s, frequencies in Hz.
//! Windows with no GPS reading carry the previous window's GPS-derived
//! values forward so every feature stays finite.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::observe::ObservedFrame;
use crate::avionics::{wrap_angle, GeoOrigin};
use crate::error::{Error, Result};

const G: f64 = 9.80665;
/// Ground speed below which course is meaningless.
const MIN_COURSE_SPEED: f64 = 5.0;
/// Block length for the surface wander statistic, s.
const WANDER_BLOCK_S: f64 = 0.2;

macro_rules! feature_vector {
    ($($(#[$doc:meta])* $name:ident),* $(,)?) => {
        /// Statistics of one analysis window.
        #[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
        pub struct FeatureVector {
            $($(#[$doc])* pub $name: f64,)*
        }

        impl FeatureVector {
            pub const NAMES: &'static [&'static str] = &[$(stringify!($name)),*];

            pub fn get(&self, name: &str) -> Option<f64> {
                match name {
                    $(stringify!($name) => Some(self.$name),)*
                    _ => None,
                }
            }

            pub fn values(&self) -> Vec<(&'static str, f64)> {
                vec![$((stringify!($name), self.$name)),*]
            }
        }
    };
}

feature_vector! {
    t_start,
    t_end,
    roll_mean, roll_std, roll_range,
    pitch_mean, pitch_std, pitch_range,
    yaw_mean, yaw_std, yaw_range,
    p_mean, p_std, p_range,
    q_mean, q_std, q_range,
    r_mean, r_std, r_range,
    throttle_mean,
    /// 1 when the throttle falls from above 0.3 to idle inside the window.
    throttle_drop,
    /// Least-squares slope of GPS ground speed, m/s^2.
    airspeed_trend,
    /// Least-squares slope of GPS altitude, m/s.
    altitude_rate,
    gps_alt_mean,
    ground_speed_mean,
    /// Largest disagreement between GPS displacement and speed times time, m.
    position_jump,
    /// Longest interval without a GPS reading, s.
    gps_gap,
    sats_min,
    /// Drop from the satellite count seen in the first window.
    sats_drop,
    fix_fraction,
    imu_health_min,
    /// 1 when every IMU channel is exactly constant.
    imu_flat,
    dead_reckoning_fraction,
    failsafe_level,
    /// Mean of measured yaw minus GPS course.
    heading_residual,
    /// Mean measured roll minus the coordinated-turn roll implied by the
    /// GPS course rate.
    roll_residual,
    /// Largest attitude change between frames not explained by the measured
    /// body rates.
    attitude_step,
    surface_resid_mean,
    surface_resid_std,
    surface_resid_max,
    /// Slope and intercept of actual against commanded deflection, fitted
    /// on per-channel window means.
    surface_gain,
    surface_offset,
    /// Spread of 0.2 s block means of the fit residual.
    surface_wander,
    /// 1 when no surface moves while some command does.
    act_frozen,
    cmd_range_max,
    resid_osc_freq,
    resid_osc_amp,
    osc_roll_freq, osc_roll_amp, osc_roll,
    osc_pitch_freq, osc_pitch_amp, osc_pitch,
    osc_yaw_freq, osc_yaw_amp, osc_yaw,
    /// RMS second difference of measured pitch.
    pitch_burr,
}

impl FeatureVector {
    pub fn is_finite(&self) -> bool {
        self.values().iter().all(|(_, v)| v.is_finite())
    }
}

/// Dominant non-DC spectral line of a detrended signal.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Oscillation {
    pub frequency_hz: f64,
    pub amplitude: f64,
}

impl Oscillation {
    pub fn score(&self) -> f64 {
        self.frequency_hz * self.amplitude
    }
}

fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        0.0
    } else {
        x.iter().sum::<f64>() / x.len() as f64
    }
}

fn std_dev(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    // Shifted by the first sample so a constant series gives exactly zero.
    let x0 = x[0];
    let m = x.iter().map(|v| v - x0).sum::<f64>() / x.len() as f64;
    (x.iter().map(|v| (v - x0 - m).powi(2)).sum::<f64>() / x.len() as f64).sqrt()
}

fn range(x: &[f64]) -> f64 {
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if x.is_empty() {
        0.0
    } else {
        hi - lo
    }
}

/// Least-squares slope of `y` against `t`; zero when underdetermined.
fn slope(t: &[f64], y: &[f64]) -> f64 {
    if t.len() < 2 {
        return 0.0;
    }
    let (mt, my) = (mean(t), mean(y));
    let var: f64 = t.iter().map(|v| (v - mt) * (v - mt)).sum();
    if var <= 0.0 {
        return 0.0;
    }
    t.iter().zip(y).map(|(a, b)| (a - mt) * (b - my)).sum::<f64>() / var
}

fn unwrap(x: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    let mut acc = 0.0;
    for (i, v) in x.iter().enumerate() {
        if i == 0 {
            acc = *v;
        } else {
            acc += wrap_angle(v - x[i - 1]);
        }
        out.push(acc);
    }
    out
}

/// Dominant oscillation of `x` sampled every `dt` seconds, after removing
/// the mean and linear trend.
pub fn dominant_oscillation(x: &[f64], dt: f64, planner: &mut FftPlanner<f64>) -> Oscillation {
    let n = x.len();
    if n < 4 || dt <= 0.0 {
        return Oscillation::default();
    }
    let t: Vec<f64> = (0..n).map(|i| i as f64).collect();
    let b = slope(&t, x);
    let (mt, mx) = (mean(&t), mean(x));
    let mut buf: Vec<Complex<f64>> = x
        .iter()
        .zip(&t)
        .map(|(v, ti)| Complex::new(v - mx - b * (ti - mt), 0.0))
        .collect();
    planner.plan_fft_forward(n).process(&mut buf);
    let (k, mag) = buf[1..=n / 2]
        .iter()
        .enumerate()
        .map(|(i, c)| (i + 1, c.norm()))
        .fold((0, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best });
    let amplitude = 2.0 * mag / n as f64;
    if amplitude < 1e-9 {
        return Oscillation::default();
    }
    Oscillation {
        frequency_hz: k as f64 / (n as f64 * dt),
        amplitude,
    }
}

/// Per-window GPS values carried across windows without readings.
#[derive(Debug, Clone, Copy)]
struct GpsCarry {
    alt: f64,
    speed: f64,
    sats: f64,
    fix: f64,
}

struct Extractor<'a> {
    frames: &'a [ObservedFrame],
    planner: FftPlanner<f64>,
    carry: GpsCarry,
    baseline_sats: Option<f64>,
}

impl Extractor<'_> {
    fn window(&mut self, lo: usize, hi: usize, t_start: f64, t_end: f64) -> FeatureVector {
        let w = &self.frames[lo..hi];
        let n = w.len();
        let dt = if n > 1 {
            (w[n - 1].t - w[0].t) / (n - 1) as f64
        } else {
            0.0
        };
        let deg = |v: f64| v.to_degrees();
        let att = |i: usize| -> Vec<f64> { w.iter().map(|f| deg(f.attitude[i])).collect() };
        let rate = |i: usize| -> Vec<f64> { w.iter().map(|f| deg(f.rates[i])).collect() };
        let roll = att(0);
        let pitch = att(1);
        let yaw: Vec<f64> = unwrap(&w.iter().map(|f| f.attitude[2]).collect::<Vec<_>>())
            .into_iter()
            .map(deg)
            .collect();
        let (p, q, r) = (rate(0), rate(1), rate(2));

        let mut fv = FeatureVector {
            t_start,
            t_end,
            roll_mean: mean(&roll),
            roll_std: std_dev(&roll),
            roll_range: range(&roll),
            pitch_mean: mean(&pitch),
            pitch_std: std_dev(&pitch),
            pitch_range: range(&pitch),
            yaw_mean: mean(&yaw),
            yaw_std: std_dev(&yaw),
            yaw_range: range(&yaw),
            p_mean: mean(&p),
            p_std: std_dev(&p),
            p_range: range(&p),
            q_mean: mean(&q),
            q_std: std_dev(&q),
            q_range: range(&q),
            r_mean: mean(&r),
            r_std: std_dev(&r),
            r_range: range(&r),
            ..FeatureVector::default()
        };

        let throttle: Vec<f64> = w.iter().map(|f| f.throttle_act).collect();
        fv.throttle_mean = mean(&throttle);
        let last = throttle.last().copied().unwrap_or(0.0);
        let peak = throttle.iter().copied().fold(0.0, f64::max);
        fv.throttle_drop = f64::from(u8::from(peak - last >= 0.3 && last <= 0.05));

        self.gps_features(lo, hi, t_start, t_end, &mut fv);
        self.imu_features(w, &mut fv);
        surface_features(w, dt, &mut self.planner, &mut fv);

        let o = |x: &[f64], pl: &mut FftPlanner<f64>| dominant_oscillation(x, dt, pl);
        let (or, op, oy) = (
            o(&roll, &mut self.planner),
            o(&pitch, &mut self.planner),
            o(&yaw, &mut self.planner),
        );
        (fv.osc_roll_freq, fv.osc_roll_amp, fv.osc_roll) = (or.frequency_hz, or.amplitude, or.score());
        (fv.osc_pitch_freq, fv.osc_pitch_amp, fv.osc_pitch) =
            (op.frequency_hz, op.amplitude, op.score());
        (fv.osc_yaw_freq, fv.osc_yaw_amp, fv.osc_yaw) = (oy.frequency_hz, oy.amplitude, oy.score());
        fv.pitch_burr = if n >= 3 {
            let d2: Vec<f64> = pitch.windows(3).map(|s| s[2] - 2.0 * s[1] + s[0]).collect();
            (d2.iter().map(|v| v * v).sum::<f64>() / d2.len() as f64).sqrt()
        } else {
            0.0
        };
        fv
    }

    fn gps_features(&mut self, lo: usize, hi: usize, t_start: f64, t_end: f64, fv: &mut FeatureVector) {
        let w = &self.frames[lo..hi];
        let readings: Vec<(f64, &_)> = w
            .iter()
            .filter_map(|f| f.gps.as_ref().map(|g| (f.t, g)))
            .collect();
        let previous = self.frames[..lo]
            .iter()
            .rev()
            .find_map(|f| f.gps.as_ref().map(|g| (f.t, g)));

        let mut edges = vec![t_start];
        edges.extend(readings.iter().map(|(t, _)| *t));
        edges.push(t_end);
        fv.gps_gap = edges.windows(2).map(|e| e[1] - e[0]).fold(0.0, f64::max);

        if readings.is_empty() {
            fv.gps_alt_mean = self.carry.alt;
            fv.ground_speed_mean = self.carry.speed;
            fv.sats_min = self.carry.sats;
            fv.fix_fraction = self.carry.fix;
        } else {
            let ts: Vec<f64> = readings.iter().map(|(t, _)| *t).collect();
            let alts: Vec<f64> = readings.iter().map(|(_, g)| g.altitude_m).collect();
            let speeds: Vec<f64> = readings.iter().map(|(_, g)| g.ground_speed).collect();
            fv.airspeed_trend = slope(&ts, &speeds);
            fv.altitude_rate = slope(&ts, &alts);
            fv.gps_alt_mean = mean(&alts);
            fv.ground_speed_mean = mean(&speeds);
            fv.sats_min = readings
                .iter()
                .map(|(_, g)| f64::from(g.satellites))
                .fold(f64::INFINITY, f64::min);
            fv.fix_fraction =
                readings.iter().filter(|(_, g)| g.fix_valid).count() as f64 / readings.len() as f64;
            self.carry = GpsCarry {
                alt: fv.gps_alt_mean,
                speed: fv.ground_speed_mean,
                sats: fv.sats_min,
                fix: fv.fix_fraction,
            };
            if self.baseline_sats.is_none() {
                let best = readings
                    .iter()
                    .map(|(_, g)| f64::from(g.satellites))
                    .fold(0.0, f64::max);
                self.baseline_sats = Some(best);
            }
        }
        fv.sats_drop = self.baseline_sats.map_or(0.0, |b| (b - fv.sats_min).max(0.0));

        let chain: Vec<(f64, &_)> = previous.into_iter().chain(readings.iter().copied()).collect();
        fv.position_jump = chain
            .windows(2)
            .map(|pair| {
                let ((t0, a), (t1, b)) = (pair[0], pair[1]);
                let origin = GeoOrigin {
                    latitude_deg: a.latitude_deg,
                    longitude_deg: a.longitude_deg,
                };
                let (n, e) = origin.to_local(b.latitude_deg, b.longitude_deg);
                let expected = 0.5 * (a.ground_speed + b.ground_speed) * (t1 - t0);
                ((n * n + e * e).sqrt() - expected).abs()
            })
            .fold(0.0, f64::max);

        let moving: Vec<(f64, f64, f64, usize)> = w
            .iter()
            .enumerate()
            .filter_map(|(i, f)| {
                f.gps
                    .as_ref()
                    .filter(|g| g.ground_speed > MIN_COURSE_SPEED)
                    .map(|g| (f.t, g.course, g.ground_speed, i))
            })
            .collect();
        if !moving.is_empty() {
            let (s, c) = moving.iter().fold((0.0, 0.0), |(s, c), (_, course, _, i)| {
                let d = wrap_angle(w[*i].attitude[2] - course);
                (s + d.sin(), c + d.cos())
            });
            fv.heading_residual = s.atan2(c).to_degrees();
        }
        if moving.len() >= 5 {
            let ts: Vec<f64> = moving.iter().map(|m| m.0).collect();
            let courses = unwrap(&moving.iter().map(|m| m.1).collect::<Vec<_>>());
            let course_rate = slope(&ts, &courses);
            let speed = mean(&moving.iter().map(|m| m.2).collect::<Vec<_>>());
            let expected = (speed * course_rate / G).atan();
            let roll = mean(&w.iter().map(|f| f.attitude[0]).collect::<Vec<_>>());
            fv.roll_residual = (roll - expected).to_degrees();
        }
    }

    fn imu_features(&self, w: &[ObservedFrame], fv: &mut FeatureVector) {
        fv.imu_health_min = if w.iter().all(|f| f.imu_healthy) { 1.0 } else { 0.0 };
        let channels = |f: &ObservedFrame| -> [f64; 9] {
            let mut c = [0.0; 9];
            c[..3].copy_from_slice(&f.attitude);
            c[3..6].copy_from_slice(&f.rates);
            c[6..].copy_from_slice(&f.accel);
            c
        };
        fv.imu_flat = match w.first() {
            Some(first) => {
                let c0 = channels(first);
                f64::from(u8::from(w.iter().all(|f| channels(f) == c0)))
            }
            None => 0.0,
        };
        let n = w.len().max(1) as f64;
        fv.dead_reckoning_fraction = w.iter().filter(|f| f.dead_reckoning).count() as f64 / n;
        fv.failsafe_level = w.iter().map(|f| f.failsafe.level()).fold(0.0, f64::max);

        fv.attitude_step = w
            .windows(2)
            .filter(|pair| pair[0].imu_healthy && pair[1].imu_healthy)
            .filter(|pair| pair[0].attitude[1].abs() < 80f64.to_radians())
            .map(|pair| {
                let (a, b) = (&pair[0], &pair[1]);
                let h = b.t - a.t;
                let [phi, theta, _] = a.attitude;
                let p = 0.5 * (a.rates[0] + b.rates[0]);
                let q = 0.5 * (a.rates[1] + b.rates[1]);
                let r = 0.5 * (a.rates[2] + b.rates[2]);
                let phi_dot = p + (q * phi.sin() + r * phi.cos()) * theta.tan();
                let theta_dot = q * phi.cos() - r * phi.sin();
                let e_roll = wrap_angle(b.attitude[0] - phi) - phi_dot * h;
                let e_pitch = (b.attitude[1] - theta) - theta_dot * h;
                e_roll.abs().max(e_pitch.abs()).to_degrees()
            })
            .fold(0.0, f64::max);
    }
}

fn surface_features(w: &[ObservedFrame], dt: f64, planner: &mut FftPlanner<f64>, fv: &mut FeatureVector) {
    let deg = f64::to_degrees;
    let cmd: Vec<[f64; 3]> = w.iter().map(|f| f.cmd.map(deg)).collect();
    let act: Vec<[f64; 3]> = w.iter().map(|f| f.act.map(deg)).collect();
    let column = |x: &[[f64; 3]], c: usize| -> Vec<f64> { x.iter().map(|v| v[c]).collect() };

    let resid: Vec<f64> = cmd
        .iter()
        .zip(&act)
        .flat_map(|(c, a)| (0..3).map(move |i| a[i] - c[i]))
        .collect();
    fv.surface_resid_mean = mean(&resid);
    fv.surface_resid_std = std_dev(&resid);
    fv.surface_resid_max = resid.iter().fold(0.0, |m, v| f64::max(m, v.abs()));

    let cbar: Vec<f64> = (0..3).map(|c| mean(&column(&cmd, c))).collect();
    let abar: Vec<f64> = (0..3).map(|c| mean(&column(&act, c))).collect();
    let (mc, ma) = (mean(&cbar), mean(&abar));
    let var: f64 = cbar.iter().map(|v| (v - mc) * (v - mc)).sum::<f64>() / 3.0;
    let (gain, offset) = if var < 1e-4 {
        (1.0, ma - mc)
    } else {
        let cov: f64 = cbar.iter().zip(&abar).map(|(c, a)| (c - mc) * (a - ma)).sum::<f64>() / 3.0;
        let k = cov / var;
        (k, ma - k * mc)
    };
    fv.surface_gain = gain;
    fv.surface_offset = offset;

    let block = if dt > 0.0 {
        ((WANDER_BLOCK_S / dt).round() as usize).max(1)
    } else {
        1
    };
    let mut blocks = Vec::new();
    for c in 0..3 {
        let e: Vec<f64> = cmd
            .iter()
            .zip(&act)
            .map(|(cm, ac)| ac[c] - (gain * cm[c] + offset))
            .collect();
        let per_block: Vec<f64> = e.chunks(block).filter(|b| b.len() == block).map(mean).collect();
        let m = mean(&per_block);
        blocks.extend(per_block.into_iter().map(|v| v - m));
    }
    fv.surface_wander = std_dev(&blocks);

    let act_range = (0..3).map(|c| range(&column(&act, c))).fold(0.0, f64::max);
    fv.cmd_range_max = (0..3).map(|c| range(&column(&cmd, c))).fold(0.0, f64::max);
    fv.act_frozen = f64::from(u8::from(act_range < 1e-9 && fv.cmd_range_max > 0.05));

    let noisiest = (0..3)
        .map(|c| {
            let r: Vec<f64> = cmd.iter().zip(&act).map(|(cm, ac)| ac[c] - cm[c]).collect();
            (std_dev(&r), r)
        })
        .fold((-1.0, Vec::new()), |best, cur| if cur.0 > best.0 { cur } else { best });
    let osc = dominant_oscillation(&noisiest.1, dt, planner);
    fv.resid_osc_freq = osc.frequency_hz;
    fv.resid_osc_amp = osc.amplitude;
}

/// Slides a `window`-second window in `stride`-second steps over the log.
pub fn extract_features(frames: &[ObservedFrame], window: f64, stride: f64) -> Result<Vec<FeatureVector>> {
    if !(window > 0.0 && window.is_finite()) || !(stride > 0.0 && stride.is_finite()) {
        return Err(Error::Analysis(format!(
            "window ({window} s) and stride ({stride} s) must be positive"
        )));
    }
    let (Some(first), Some(last)) = (frames.first(), frames.last()) else {
        return Err(Error::Analysis("empty telemetry".into()));
    };
    if frames.windows(2).any(|p| p[1].t <= p[0].t) {
        return Err(Error::Analysis("telemetry is not strictly time-ordered".into()));
    }
    let span = last.t - first.t;
    if span + 1e-9 < 2.0 * window {
        return Err(Error::Analysis(format!(
            "telemetry spans {span:.3} s, need at least two {window} s windows"
        )));
    }
    let mut ex = Extractor {
        frames,
        planner: FftPlanner::new(),
        carry: GpsCarry {
            alt: 0.0,
            speed: 0.0,
            sats: 0.0,
            fix: 0.0,
        },
        baseline_sats: None,
    };
    let mut out = Vec::new();
    let mut lo = 0;
    let mut k = 0usize;
    loop {
        let t_start = first.t + k as f64 * stride;
        let t_end = t_start + window;
        if t_end > last.t + 1e-9 {
            break;
        }
        while lo < frames.len() && frames[lo].t < t_start - 1e-9 {
            lo += 1;
        }
        let mut hi = lo;
        while hi < frames.len() && frames[hi].t < t_end - 1e-9 {
            hi += 1;
        }
        out.push(ex.window(lo, hi, t_start, t_end));
        k += 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autopilot::Phase;
    use crate::damage::observe::{ObservedFailsafe, ObservedGps};

    pub(crate) fn frame(t: f64) -> ObservedFrame {
        ObservedFrame {
            t,
            attitude: [0.01, 0.02, 1.0],
            rates: [0.0; 3],
            accel: [0.0, 0.0, -9.8],
            imu_healthy: true,
            gps: Some(ObservedGps {
                latitude_deg: 34.0,
                longitude_deg: 108.0,
                altitude_m: 400.0,
                ground_speed: 0.0,
                course: 0.0,
                climb_rate: 0.0,
                satellites: 15,
                fix_valid: true,
            }),
            dead_reckoning: false,
            phase: Phase::LevelFlight,
            failsafe: ObservedFailsafe::Nominal,
            cmd: [-0.05, 0.0, 0.0],
            act: [-0.05, 0.0, 0.0],
            throttle_cmd: 0.5,
            throttle_act: 0.5,
        }
    }

    fn constant_log(seconds: f64) -> Vec<ObservedFrame> {
        (0..=(seconds * 50.0) as usize).map(|i| frame(i as f64 * 0.02)).collect()
    }

    #[test]
    fn constant_telemetry_has_no_spread() {
        let fv = extract_features(&constant_log(10.0), 2.0, 1.0).unwrap();
        assert_eq!(fv.len(), 9);
        for f in &fv {
            assert!(f.is_finite());
            for (name, v) in f.values() {
                if name.ends_with("_std")
                    || name.ends_with("_range")
                    || name.starts_with("osc_")
                    || name == "pitch_burr"
                    || name == "surface_wander"
                    || name == "resid_osc_amp"
                {
                    assert_eq!(v, 0.0, "{name}");
                }
            }
            assert_eq!(f.imu_flat, 1.0);
            assert_eq!(f.act_frozen, 0.0);
        }
    }

    #[test]
    fn two_hertz_roll_is_found() {
        let mut log = constant_log(6.0);
        for f in &mut log {
            f.attitude[0] = 10f64.to_radians() * (2.0 * std::f64::consts::PI * 2.0 * f.t).sin();
        }
        let fv = extract_features(&log, 2.0, 1.0).unwrap();
        let resolution = 1.0 / 2.0;
        for f in &fv {
            assert!((f.osc_roll_freq - 2.0).abs() <= resolution, "{}", f.osc_roll_freq);
            assert!((f.osc_roll_amp - 10.0).abs() < 1.5, "{}", f.osc_roll_amp);
        }
    }

    #[test]
    fn throttle_cut_sets_drop_flag() {
        let mut log = constant_log(4.0);
        for f in &mut log {
            f.throttle_act = if f.t < 1.0 { 0.6 } else { 0.0 };
        }
        let fv = extract_features(&log, 2.0, 1.0).unwrap();
        assert_eq!(fv[0].throttle_drop, 1.0);
        assert_eq!(fv[1].throttle_drop, 0.0);
    }

    #[test]
    fn too_short_is_an_error() {
        assert!(extract_features(&constant_log(3.0), 2.0, 1.0).is_err());
        assert!(extract_features(&constant_log(10.0), 0.0, 1.0).is_err());
        assert!(extract_features(&[], 2.0, 1.0).is_err());
    }

    #[test]
    fn frozen_surfaces_and_gps_gap() {
        let mut log = constant_log(6.0);
        for f in &mut log {
            f.cmd[0] = 0.01 * (f.t * 3.0).sin();
            if f.t >= 2.0 {
                f.gps = None;
            }
        }
        let fv = extract_features(&log, 2.0, 1.0).unwrap();
        assert_eq!(fv[0].act_frozen, 1.0);
        assert!(fv[0].gps_gap < 0.05);
        assert!((fv[2].gps_gap - 2.0).abs() < 1e-9);
        assert_eq!(fv[2].sats_min, 15.0);
    }

    #[test]
    fn position_jump_and_gain() {
        let mut log = constant_log(6.0);
        for f in &mut log {
            f.cmd = [-0.05, 0.02, 0.0];
            f.act = [-0.04, 0.016, 0.0];
            if f.t >= 3.0 {
                if let Some(g) = f.gps.as_mut() {
                    g.latitude_deg += 0.05;
                }
            }
        }
        let fv = extract_features(&log, 2.0, 1.0).unwrap();
        assert!(fv[0].position_jump < 1.0);
        assert!(fv[2].position_jump > 5000.0);
        assert!((fv[0].surface_gain - 0.8).abs() < 1e-9);
        assert!(fv[0].surface_offset.abs() < 1e-9);
    }

    #[test]
    fn deterministic() {
        let mut log = constant_log(8.0);
        for (i, f) in log.iter_mut().enumerate() {
            f.attitude[1] = ((i * 7919) % 13) as f64 * 1e-3;
        }
        let a = extract_features(&log, 2.0, 0.5).unwrap();
        let b = extract_features(&log, 2.0, 0.5).unwrap();
        assert_eq!(a, b);
    }
}
