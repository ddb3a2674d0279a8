use std::collections::HashSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use uavlab::campaign::{load_index, load_scenario, run_campaign, run_simulation, write_run, CampaignMatrix, Scenario};
use uavlab::damage::{analyze_jobs, emit_report, AnalysisJob, AnalyzedRun, ConfusionMatrix, ReportIndex, RuleBase};
use uavlab::faultlab::FaultKind;

#[derive(Parser)]
#[command(name = "uavlab", version, about = "Fixed-wing UAV fault-injection laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fly one scenario and write its telemetry and summary.
    Run {
        scenario: PathBuf,
        #[command(flatten)]
        sim: SimFlags,
        /// Output directory (default: the scenario's output_dir, else runs/<name>).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Expand a campaign matrix over a base scenario and fly every run.
    Campaign {
        matrix: PathBuf,
        base: PathBuf,
        #[command(flatten)]
        sim: SimFlags,
        #[arg(long, default_value = "campaign")]
        out: PathBuf,
        #[arg(long, default_value_t = default_parallel())]
        parallel: usize,
    },
    /// Damage analysis of recorded telemetry files.
    Analyze {
        #[arg(required = true)]
        telemetry: Vec<PathBuf>,
        #[command(flatten)]
        analysis: AnalysisFlags,
        #[arg(long, default_value = "analysis")]
        out: PathBuf,
    },
    /// Damage analysis of a whole campaign, scored against its labels.
    Report {
        /// Campaign index.json.
        index: PathBuf,
        #[command(flatten)]
        analysis: AnalysisFlags,
        /// Output directory (default: report/ next to the index).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SimFlags {
    /// Override the scenario seed (campaign: the base seed).
    #[arg(long)]
    seed: Option<u64>,
    /// Telemetry rate, Hz; must divide the control rate.
    #[arg(long)]
    log_rate: Option<u32>,
}

#[derive(Args)]
struct AnalysisFlags {
    /// Rule-base TOML (default: built-in rules).
    #[arg(long)]
    rules: Option<PathBuf>,
    #[arg(long, default_value_t = default_parallel())]
    parallel: usize,
}

fn default_parallel() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn load_rules(path: Option<&Path>) -> Result<RuleBase> {
    Ok(match path {
        Some(p) => RuleBase::load(p)?,
        None => RuleBase::default(),
    })
}

fn base_dir(path: &Path) -> PathBuf {
    path.parent().map_or_else(|| PathBuf::from("."), Path::to_path_buf)
}

fn cmd_run(path: &Path, sim: &SimFlags, out: Option<PathBuf>) -> Result<()> {
    let mut file = load_scenario(path)?.file;
    if let Some(s) = sim.seed {
        file.seed = s;
    }
    if let Some(r) = sim.log_rate {
        file.timing.log_rate_hz = r;
    }
    let out = out
        .or_else(|| file.output_dir.clone())
        .unwrap_or_else(|| Path::new("runs").join(&file.name));
    let scenario = Scenario::from_file(file, &base_dir(path))?;
    let output = run_simulation(&scenario)?;
    write_run(&output, &scenario, &out)?;
    let s = &output.summary;
    println!(
        "{}: {} at t = {:.2} s, airspeed {:.1} -> {:.1} m/s (max {:.1})",
        s.scenario,
        s.termination.name(),
        s.end_time,
        s.initial_airspeed,
        s.final_airspeed,
        s.max_airspeed
    );
    for t in &s.transitions {
        println!("  {:8.2} s  {:<9} {} -> {}", t.t, t.kind, t.from, t.to);
    }
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_campaign(matrix: &Path, base: &Path, sim: &SimFlags, out: &Path, parallel: usize) -> Result<()> {
    let mut m = CampaignMatrix::load(matrix)?;
    if let Some(s) = sim.seed {
        m.base_seed = s;
    }
    let mut file = load_scenario(base)?.file;
    if let Some(r) = sim.log_rate {
        file.timing.log_rate_hz = r;
    }
    let started = std::time::Instant::now();
    let index = run_campaign(&m, &file, &base_dir(base), out, parallel)?;
    let mut by_end: Vec<(&str, usize)> = Vec::new();
    for r in &index.runs {
        match by_end.iter_mut().find(|(k, _)| *k == r.termination) {
            Some((_, n)) => *n += 1,
            None => by_end.push((&r.termination, 1)),
        }
    }
    let ends: Vec<String> = by_end.iter().map(|(k, n)| format!("{n} {k}")).collect();
    println!(
        "{} runs in {:.1} s ({}); index at {}",
        index.runs.len(),
        started.elapsed().as_secs_f64(),
        ends.join(", "),
        out.join("index.json").display()
    );
    Ok(())
}

/// `telemetry.csv` files are named after their run directory.
fn run_id_for(path: &Path) -> String {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
    let from_dir = path
        .parent()
        .and_then(|p| p.file_name())
        .and_then(|s| s.to_str())
        .filter(|_| stem == "telemetry");
    let raw = from_dir.unwrap_or(stem);
    raw.chars()
        .map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' })
        .collect()
}

fn print_runs(runs: &[AnalyzedRun]) {
    for r in runs {
        let rep = &r.report;
        let glide = rep.glide_km.map_or(String::new(), |g| format!("  glide {g:.2} km"));
        let onset = rep.onset_s.map_or("-".to_string(), |t| format!("{t:.1} s"));
        println!(
            "{:<40} {:<9} {:<25} onset {:<9} mission {:?}, platform {:?}{glide}",
            r.run_id,
            rep.location.name(),
            rep.mode.map_or("none", FaultKind::name),
            onset,
            rep.mission_impact,
            rep.platform_damage,
        );
    }
}

fn print_matrix(title: &str, m: &ConfusionMatrix) {
    println!("{title} (rows: true, columns: inferred)");
    let w = m.labels.iter().map(String::len).max().unwrap_or(4).max(4);
    let used: Vec<usize> = (0..m.labels.len())
        .filter(|&i| m.counts[i].iter().sum::<usize>() > 0 || m.counts.iter().any(|r| r[i] > 0))
        .collect();
    print!("{:w$}", "");
    for &j in &used {
        print!(" {:>5}", &m.labels[j][..m.labels[j].len().min(5)]);
    }
    println!();
    for &i in &used {
        print!("{:w$}", m.labels[i]);
        for &j in &used {
            print!(" {:>5}", m.counts[i][j]);
        }
        println!();
    }
}

fn print_summary(index: &ReportIndex) {
    if let (Some(loc), Some(mode)) = (&index.location_confusion, &index.mode_confusion) {
        print_matrix("fault location", loc);
        print_matrix("fault mode", mode);
        println!(
            "location accuracy {:.1}% ({}/{}), mode accuracy {:.1}%",
            100.0 * loc.accuracy(),
            loc.correct(),
            loc.total(),
            100.0 * mode.accuracy()
        );
    }
}

fn cmd_analyze(paths: &[PathBuf], flags: &AnalysisFlags, out: &Path) -> Result<()> {
    let rules = load_rules(flags.rules.as_deref())?;
    let mut seen = HashSet::new();
    let jobs: Vec<AnalysisJob> = paths
        .iter()
        .map(|p| {
            let base = run_id_for(p);
            let mut id = base.clone();
            let mut n = 1;
            while !seen.insert(id.clone()) {
                n += 1;
                id = format!("{base}-{n}");
            }
            AnalysisJob {
                run_id: id,
                truth: None,
                telemetry: p.clone(),
            }
        })
        .collect();
    let runs = analyze_jobs(&jobs, &rules, flags.parallel)?;
    print_runs(&runs);
    emit_report(&runs, out)?;
    println!("wrote {}", out.join("report.json").display());
    Ok(())
}

fn cmd_report(index_path: &Path, flags: &AnalysisFlags, out: Option<PathBuf>) -> Result<()> {
    let rules = load_rules(flags.rules.as_deref())?;
    let index = load_index(index_path)?;
    if index.runs.is_empty() {
        bail!("{} lists no runs", index_path.display());
    }
    let root = base_dir(index_path);
    let jobs: Vec<AnalysisJob> = index
        .runs
        .iter()
        .map(|r| AnalysisJob {
            run_id: r.run_id.clone(),
            truth: Some(r.fault.clone()),
            telemetry: root.join(&r.dir).join("telemetry.csv"),
        })
        .collect();
    let runs = analyze_jobs(&jobs, &rules, flags.parallel)?;
    let out = out.unwrap_or_else(|| root.join("report"));
    let report = emit_report(&runs, &out)?;
    print_runs(&runs);
    print_summary(&report);
    println!("wrote {}", out.join("report.json").display());
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { scenario, sim, out } => {
            cmd_run(&scenario, &sim, out).with_context(|| format!("running {}", scenario.display()))
        }
        Command::Campaign {
            matrix,
            base,
            sim,
            out,
            parallel,
        } => cmd_campaign(&matrix, &base, &sim, &out, parallel).context("campaign failed"),
        Command::Analyze { telemetry, analysis, out } => cmd_analyze(&telemetry, &analysis, &out),
        Command::Report { index, analysis, out } => {
            cmd_report(&index, &analysis, out).with_context(|| format!("reporting {}", index.display()))
        }
    }
}
