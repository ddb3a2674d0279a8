use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Step-response figures of merit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepMetrics {
    /// Peak excursion past the target as a percentage of the step.
    pub overshoot_pct: f64,
    /// Time after the step of the last exit from the 2 % band, s.
    pub settling_time_s: f64,
    /// |mean of the final 10 s - target|, m.
    pub steady_state_error: f64,
}

pub const SETTLING_BAND: f64 = 0.02;
const STEADY_WINDOW_S: f64 = 10.0;

/// Metrics of a sampled response going from `initial` to `target`, with the
/// step applied at `times[0]`.
pub fn step_metrics(times: &[f64], values: &[f64], initial: f64, target: f64) -> Result<StepMetrics> {
    if times.len() != values.len() || times.len() < 2 {
        return Err(Error::Analysis("step trace needs matching time and value samples".into()));
    }
    let amplitude = target - initial;
    if amplitude == 0.0 {
        return Err(Error::Analysis("step amplitude is zero".into()));
    }
    let sign = amplitude.signum();
    let peak = values.iter().map(|y| sign * (y - target)).fold(f64::NEG_INFINITY, f64::max);
    let overshoot_pct = (peak / amplitude.abs() * 100.0).max(0.0);

    let band = SETTLING_BAND * amplitude.abs();
    let t0 = times[0];
    let settling_time_s = match values.iter().rposition(|y| (y - target).abs() > band) {
        None => 0.0,
        Some(i) if i + 1 < times.len() => times[i + 1] - t0,
        Some(_) => f64::INFINITY,
    };

    let t_end = times[times.len() - 1];
    let tail: Vec<f64> = times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= t_end - STEADY_WINDOW_S)
        .map(|(_, y)| *y)
        .collect();
    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    Ok(StepMetrics {
        overshoot_pct,
        settling_time_s,
        steady_state_error: (mean - target).abs(),
    })
}
