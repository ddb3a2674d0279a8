//! Report artifacts: per-run JSON, a campaign summary with confusion
//! matrices, and SVG time-series plots.
//!
//! Layout under the output directory:
//!
//! ```text
//! report.json                 ReportIndex
//! <run_id>/report.json        ReportRunEntry
//! <run_id>/<channel>.svg      roll, pitch, altitude, ground_speed, throttle
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::observe::ObservedFrame;
use super::rules::DamageReport;
use crate::campaign::write_json;
use crate::error::{Error, Result};
use crate::faultlab::{FaultKind, FaultLocation};

/// Key channels of one flight, sampled at the telemetry rate.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PlotSeries {
    pub t: Vec<f64>,
    pub roll_deg: Vec<f64>,
    pub pitch_deg: Vec<f64>,
    /// GPS altitude, held between fixes.
    pub altitude_m: Vec<f64>,
    pub ground_speed: Vec<f64>,
    pub throttle: Vec<f64>,
}

impl PlotSeries {
    pub fn from_frames(frames: &[ObservedFrame]) -> Self {
        let mut s = PlotSeries::default();
        let first_gps = frames.iter().find_map(|f| f.gps);
        let (mut alt, mut gs) = first_gps.map_or((0.0, 0.0), |g| (g.altitude_m, g.ground_speed));
        for f in frames {
            if let Some(g) = f.gps {
                alt = g.altitude_m;
                gs = g.ground_speed;
            }
            s.t.push(f.t);
            s.roll_deg.push(f.attitude[0].to_degrees());
            s.pitch_deg.push(f.attitude[1].to_degrees());
            s.altitude_m.push(alt);
            s.ground_speed.push(gs);
            s.throttle.push(f.throttle_act);
        }
        s
    }

    fn channels(&self) -> [(&'static str, &'static str, &[f64]); 5] {
        [
            ("roll", "roll, deg", &self.roll_deg),
            ("pitch", "pitch, deg", &self.pitch_deg),
            ("altitude", "GPS altitude, m", &self.altitude_m),
            ("ground_speed", "ground speed, m/s", &self.ground_speed),
            ("throttle", "throttle", &self.throttle),
        ]
    }
}

/// One analyzed flight. `truth` is the injected fault name, `"none"` for a
/// control run, or absent when the label is unknown.
#[derive(Debug, Clone)]
pub struct AnalyzedRun {
    pub run_id: String,
    pub truth: Option<String>,
    pub report: DamageReport,
    pub series: PlotSeries,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRunEntry {
    pub run_id: String,
    pub truth: Option<String>,
    pub report: DamageReport,
    pub plots: Vec<PathBuf>,
}

/// Rows are true labels, columns inferred ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn new(labels: Vec<String>) -> Self {
        let n = labels.len();
        ConfusionMatrix {
            labels,
            counts: vec![vec![0; n]; n],
        }
    }

    pub fn locations() -> Self {
        let all = [FaultLocation::None, FaultLocation::Gps, FaultLocation::Imu, FaultLocation::Actuator];
        Self::new(all.iter().map(|l| l.name().to_string()).collect())
    }

    pub fn modes() -> Self {
        let mut labels = vec!["none".to_string()];
        labels.extend(FaultKind::ALL.iter().map(|k| k.name().to_string()));
        Self::new(labels)
    }

    fn index(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::Analysis(format!("unknown label `{label}`")))
    }

    pub fn add(&mut self, truth: &str, inferred: &str) -> Result<()> {
        let (i, j) = (self.index(truth)?, self.index(inferred)?);
        self.counts[i][j] += 1;
        Ok(())
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> usize {
        (0..self.labels.len()).map(|i| self.counts[i][i]).sum()
    }

    /// Fraction on the diagonal; 0 for an empty matrix.
    pub fn accuracy(&self) -> f64 {
        match self.total() {
            0 => 0.0,
            n => self.correct() as f64 / n as f64,
        }
    }

    /// Correct fraction within one true-label row.
    pub fn row_accuracy(&self, label: &str) -> Option<f64> {
        let i = self.labels.iter().position(|l| l == label)?;
        let n: usize = self.counts[i].iter().sum();
        (n > 0).then(|| self.counts[i][i] as f64 / n as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportIndex {
    pub runs: Vec<ReportRunEntry>,
    /// Present when at least one run carries a truth label.
    pub location_confusion: Option<ConfusionMatrix>,
    pub mode_confusion: Option<ConfusionMatrix>,
    pub location_accuracy: Option<f64>,
}

fn truth_labels(truth: &str) -> Result<(&'static str, &'static str)> {
    if truth == "none" {
        return Ok(("none", "none"));
    }
    let kind = FaultKind::from_name(truth)
        .ok_or_else(|| Error::Analysis(format!("unknown fault label `{truth}`")))?;
    Ok((kind.location().name(), kind.name()))
}

/// Builds the summary without touching the file system.
pub fn summarize(runs: &[AnalyzedRun]) -> Result<(ConfusionMatrix, ConfusionMatrix, usize)> {
    let mut loc = ConfusionMatrix::locations();
    let mut mode = ConfusionMatrix::modes();
    let mut labeled = 0;
    for r in runs {
        let Some(truth) = &r.truth else { continue };
        let (tl, tm) = truth_labels(truth)?;
        loc.add(tl, r.report.location.name())?;
        mode.add(tm, r.report.mode.map_or("none", FaultKind::name))?;
        labeled += 1;
    }
    Ok((loc, mode, labeled))
}

fn check_run_id(id: &str) -> Result<()> {
    let ok = !id.is_empty()
        && id != "."
        && id != ".."
        && id.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c));
    if ok {
        Ok(())
    } else {
        Err(Error::Analysis(format!("run id `{id}` is not a plain file name")))
    }
}

/// Writes the report tree under `out_dir` and returns its index.
pub fn emit_report(runs: &[AnalyzedRun], out_dir: &Path) -> Result<ReportIndex> {
    if runs.is_empty() {
        return Err(Error::Analysis("no runs to report".into()));
    }
    let mut ids: Vec<&str> = runs.iter().map(|r| r.run_id.as_str()).collect();
    ids.sort_unstable();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::Analysis(format!("duplicate run id `{}`", w[0])));
    }
    for id in &ids {
        check_run_id(id)?;
    }
    let (loc, mode, labeled) = summarize(runs)?;

    let mut entries = Vec::with_capacity(runs.len());
    for r in runs {
        let dir = out_dir.join(&r.run_id);
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let mut plots = Vec::new();
        for (name, ylabel, y) in r.series.channels() {
            let rel = PathBuf::from(&r.run_id).join(format!("{name}.svg"));
            let title = format!("{}: {ylabel}", r.run_id);
            let svg = svg_plot(&title, &r.series.t, y, r.report.onset_s);
            let path = out_dir.join(&rel);
            std::fs::write(&path, svg).map_err(|e| Error::io(&path, e))?;
            plots.push(rel);
        }
        let entry = ReportRunEntry {
            run_id: r.run_id.clone(),
            truth: r.truth.clone(),
            report: r.report.clone(),
            plots,
        };
        write_json(&dir.join("report.json"), &entry)?;
        entries.push(entry);
    }

    let index = ReportIndex {
        runs: entries,
        location_accuracy: (labeled > 0).then(|| loc.accuracy()),
        location_confusion: (labeled > 0).then_some(loc),
        mode_confusion: (labeled > 0).then_some(mode),
    };
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    write_json(&out_dir.join("report.json"), &index)?;
    Ok(index)
}

const W: f64 = 800.0;
const H: f64 = 240.0;
const ML: f64 = 60.0;
const MR: f64 = 15.0;
const MT: f64 = 25.0;
const MB: f64 = 30.0;
const MAX_POINTS: usize = 2000;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn span(v: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = v
        .filter(|x| x.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-9 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// Single-channel line plot; an optional dashed marker at `marker_t`.
fn svg_plot(title: &str, t: &[f64], y: &[f64], marker_t: Option<f64>) -> String {
    let (t0, t1) = span(t.iter().copied());
    let (y0, y1) = span(y.iter().copied());
    let pw = W - ML - MR;
    let ph = H - MT - MB;
    let sx = |v: f64| ML + (v - t0) / (t1 - t0) * pw;
    let sy = |v: f64| MT + (y1 - v) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{ML}" y="16" font-size="13">{}</text>"#, escape(title));
    let _ = writeln!(
        s,
        r##"<rect x="{ML}" y="{MT}" width="{pw}" height="{ph}" fill="none" stroke="#888"/>"##
    );
    for (v, anchor_y) in [(y1, MT + 4.0), (y0, MT + ph)] {
        let _ = writeln!(s, r#"<text x="{}" y="{anchor_y:.1}" text-anchor="end">{v:.2}</text>"#, ML - 4.0);
    }
    for (v, anchor) in [(t0, "start"), (t1, "end")] {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="{anchor}">{v:.1} s</text>"#,
            sx(v),
            H - 10.0
        );
    }
    if let Some(m) = marker_t.filter(|m| (t0..=t1).contains(m)) {
        let x = sx(m);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{MT}" x2="{x:.2}" y2="{:.2}" stroke="#c00" stroke-dasharray="4 3"/>"##,
            MT + ph
        );
    }
    let step = t.len().div_ceil(MAX_POINTS).max(1);
    let mut pts = String::new();
    for (i, (tv, yv)) in t.iter().zip(y).enumerate().step_by(step) {
        if i > 0 {
            pts.push(' ');
        }
        let _ = write!(pts, "{:.2},{:.2}", sx(*tv), sy(*yv));
    }
    let _ = writeln!(
        s,
        r##"<polyline fill="none" stroke="#1f5fa8" stroke-width="1.2" points="{pts}"/>"##
    );
    s.push_str("</svg>\n");
    s
}
