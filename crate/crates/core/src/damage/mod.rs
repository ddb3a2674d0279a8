//! Damage analysis from externally observable flight behavior: windowed
//! features, an ordered rule base, glide-distance estimates and reports.
//!
//! The classifier only sees [`ObservedFrame`]s, which carry no truth state
//! and no fault labels.

mod features;
mod glide;
mod observe;
mod report;
mod rules;

pub use features::{dominant_oscillation, extract_features, FeatureVector, Oscillation};
pub use glide::{fallback_glide, glide_distance_estimate, GlideSample};
pub use observe::{observe, ObservedFailsafe, ObservedFrame, ObservedGps};
pub use report::{emit_report, summarize, AnalyzedRun, ConfusionMatrix, PlotSeries, ReportIndex, ReportRunEntry};
pub use rules::{
    classify, Capability, Condition, DamageReport, MissionImpact, Op, PlatformDamage, Rule, RuleBase,
    RuleSettings,
};

use std::path::PathBuf;

use rayon::prelude::*;

use crate::campaign::{read_telemetry_file, TelemetryRow};
use crate::error::{Error, Result};

/// Features, classification and glide estimate for one flight.
pub fn analyze(frames: &[ObservedFrame], rules: &RuleBase) -> Result<DamageReport> {
    let s = &rules.settings;
    let features = extract_features(frames, s.window_s, s.stride_s)?;
    let mut report = classify(&features, rules);
    if report.mode.is_some() {
        report.glide_km = fallback_glide(frames).map(|g| glide_distance_estimate(&g));
    }
    Ok(report)
}

/// [`analyze`] on recorded telemetry rows.
pub fn analyze_rows(rows: &[TelemetryRow], rules: &RuleBase) -> Result<DamageReport> {
    analyze(&observe(rows)?, rules)
}

/// Report and plot series for one recorded flight.
pub fn analyze_run(run_id: &str, truth: Option<String>, rows: &[TelemetryRow], rules: &RuleBase) -> Result<AnalyzedRun> {
    let frames = observe(rows)?;
    Ok(AnalyzedRun {
        run_id: run_id.to_string(),
        truth,
        report: analyze(&frames, rules)?,
        series: PlotSeries::from_frames(&frames),
    })
}

/// One telemetry file to analyze.
#[derive(Debug, Clone)]
pub struct AnalysisJob {
    pub run_id: String,
    pub truth: Option<String>,
    pub telemetry: PathBuf,
}

/// Analyzes independent telemetry files on `parallel` threads. Output order
/// follows `jobs`.
pub fn analyze_jobs(jobs: &[AnalysisJob], rules: &RuleBase, parallel: usize) -> Result<Vec<AnalyzedRun>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallel.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| {
        jobs.par_iter()
            .map(|j| {
                let rows = read_telemetry_file(&j.telemetry)?;
                analyze_run(&j.run_id, j.truth.clone(), &rows, rules).map_err(|e| match e {
                    Error::Analysis(m) => Error::Analysis(format!("{}: {m}", j.telemetry.display())),
                    other => other,
                })
            })
            .collect()
    })
}
