use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::runner::{run_simulation, write_json, write_run, Termination};
use super::scenario::{EndTrigger, Scenario, ScenarioFile};
use crate::autopilot::Phase;
use crate::error::{Error, Result};
use crate::faultlab::{FaultEntry, FaultKind, FaultLocation};

/// One row of a campaign matrix. `modes` holds catalog names, `"all"` for
/// the standard thirteen, or `"none"` for unfaulted control runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixEntry {
    pub modes: Vec<String>,
    pub phases: Vec<Phase>,
    pub seeds: u32,
    #[serde(default)]
    pub offset_s: Option<f64>,
    #[serde(default)]
    pub duration_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignMatrix {
    pub base_seed: u64,
    /// Injection delay after phase entry, s.
    pub offset_s: f64,
    /// Observation time after the injection instant, s.
    pub observe_s: f64,
    pub entries: Vec<MatrixEntry>,
}

impl Default for CampaignMatrix {
    fn default() -> Self {
        CampaignMatrix {
            base_seed: 1,
            offset_s: 30.0,
            observe_s: 90.0,
            entries: Vec::new(),
        }
    }
}

/// A planned run: fault kind (None for a control run), phase and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunPlan {
    pub run_id: String,
    pub kind: Option<FaultKind>,
    pub phase: Phase,
    pub seed: u64,
    pub offset_s: f64,
    pub duration_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub run_id: String,
    pub dir: PathBuf,
    pub fault: String,
    pub location: FaultLocation,
    pub phase: Phase,
    pub seed: u64,
    pub termination: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignIndex {
    pub runs: Vec<IndexEntry>,
}

impl CampaignMatrix {
    /// Every campaign fault kind in level flight and on the glide slope, five
    /// seeds each, plus five unfaulted control runs per phase.
    pub fn standard() -> Self {
        CampaignMatrix {
            entries: vec![
                MatrixEntry {
                    modes: vec!["all".into()],
                    phases: vec![Phase::LevelFlight, Phase::GlideSlope],
                    seeds: 5,
                    offset_s: None,
                    duration_s: None,
                },
                MatrixEntry {
                    modes: vec!["none".into()],
                    phases: vec![Phase::LevelFlight, Phase::GlideSlope],
                    seeds: 5,
                    offset_s: None,
                    duration_s: None,
                },
            ],
            ..CampaignMatrix::default()
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            source_name: "campaign matrix".into(),
            line: e.span().map_or(0, |s| text[..s.start].matches('\n').count() + 1),
            message: e.message().to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Expands the matrix into individual runs.
    pub fn plan(&self) -> Result<Vec<RunPlan>> {
        if self.entries.is_empty() {
            return Err(Error::Config("campaign matrix has no entries".into()));
        }
        if !(self.offset_s >= 0.0) || !(self.observe_s > 0.0) {
            return Err(Error::Config("offset_s must be >= 0 and observe_s > 0".into()));
        }
        let mut runs = Vec::new();
        for (i, e) in self.entries.iter().enumerate() {
            if e.modes.is_empty() || e.phases.is_empty() || e.seeds == 0 {
                return Err(Error::Config(format!("matrix entry {i} is empty")));
            }
            if let Some(p) = e.phases.iter().find(|p| !matches!(p, Phase::LevelFlight | Phase::GlideSlope)) {
                return Err(Error::Config(format!("matrix entry {i}: faults cannot be anchored to {}", p.name())));
            }
            let mut kinds: Vec<Option<FaultKind>> = Vec::new();
            for m in &e.modes {
                match m.as_str() {
                    "all" => kinds.extend(FaultKind::CAMPAIGN.map(Some)),
                    "none" => kinds.push(None),
                    name => kinds.push(Some(
                        FaultKind::from_name(name)
                            .ok_or_else(|| Error::Config(format!("matrix entry {i}: unknown mode {name:?}")))?,
                    )),
                }
            }
            for kind in kinds {
                for &phase in &e.phases {
                    for s in 0..e.seeds as u64 {
                        let seed = self.base_seed + s;
                        let fault = kind.map_or("none", FaultKind::name);
                        runs.push(RunPlan {
                            run_id: format!("{fault}-{}-s{seed}", phase.name()),
                            kind,
                            phase,
                            seed,
                            offset_s: e.offset_s.unwrap_or(self.offset_s),
                            duration_s: e.duration_s.unwrap_or(f64::INFINITY),
                        });
                    }
                }
            }
        }
        let mut ids: Vec<&str> = runs.iter().map(|r| r.run_id.as_str()).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Config(format!("duplicate run {}", w[0])));
        }
        Ok(runs)
    }

    /// Scenario file for one planned run, derived from the base.
    pub fn scenario_for(&self, plan: &RunPlan, base: &ScenarioFile) -> ScenarioFile {
        let mut f = base.clone();
        f.name = plan.run_id.clone();
        f.seed = plan.seed;
        f.end_after = Some(EndTrigger {
            phase: plan.phase,
            after_s: plan.offset_s + self.observe_s,
        });
        f.faults = match plan.kind {
            Some(kind) => vec![FaultEntry {
                catalog: Some(kind.name().into()),
                phase: Some(plan.phase),
                offset_s: Some(plan.offset_s),
                duration_s: Some(plan.duration_s),
                ..FaultEntry::default()
            }],
            None => Vec::new(),
        };
        f
    }
}

/// Runs every planned scenario and writes one directory per run plus
/// `index.json`. All scenarios are validated before any run starts.
pub fn run_campaign(
    matrix: &CampaignMatrix,
    base: &ScenarioFile,
    base_dir: &Path,
    out_dir: &Path,
    parallel: usize,
) -> Result<CampaignIndex> {
    let plans = matrix.plan()?;
    let scenarios = plans
        .iter()
        .map(|p| Scenario::from_file(matrix.scenario_for(p, base), base_dir))
        .collect::<Result<Vec<_>>>()?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallel.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let results: Vec<Result<Termination>> = pool.install(|| {
        plans
            .par_iter()
            .zip(scenarios.par_iter())
            .map(|(plan, sc)| {
                let out = run_simulation(sc)?;
                write_run(&out, sc, &out_dir.join(&plan.run_id))?;
                Ok(out.summary.termination)
            })
            .collect()
    });

    let mut runs = Vec::with_capacity(plans.len());
    for (plan, res) in plans.iter().zip(results) {
        let termination = res?;
        runs.push(IndexEntry {
            run_id: plan.run_id.clone(),
            dir: PathBuf::from(&plan.run_id),
            fault: plan.kind.map_or("none", FaultKind::name).into(),
            location: plan.kind.map_or(FaultLocation::None, FaultKind::location),
            phase: plan.phase,
            seed: plan.seed,
            termination: termination.name().into(),
        });
    }
    let index = CampaignIndex { runs };
    write_json(&out_dir.join("index.json"), &index)?;
    Ok(index)
}

pub fn load_index(path: &Path) -> Result<CampaignIndex> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(mode: &str) -> CampaignMatrix {
        CampaignMatrix {
            entries: vec![MatrixEntry {
                modes: vec![mode.into()],
                phases: vec![Phase::LevelFlight],
                seeds: 1,
                offset_s: None,
                duration_s: None,
            }],
            ..CampaignMatrix::default()
        }
    }

    #[test]
    fn one_by_one_by_one() {
        assert_eq!(single("servo_stuck").plan().unwrap().len(), 1);
    }

    #[test]
    fn standard_cardinality() {
        let m = CampaignMatrix::standard();
        let plans = m.plan().unwrap();
        let faulted = plans.iter().filter(|p| p.kind.is_some()).count();
        assert_eq!(faulted, 13 * 2 * 5);
        assert_eq!(plans.len() - faulted, 2 * 5);
    }

    #[test]
    fn bad_entries_rejected() {
        assert!(single("warp_drive").plan().is_err());
        assert!(CampaignMatrix::default().plan().is_err());
        let mut m = single("servo_stuck");
        m.entries[0].phases = vec![Phase::Climb];
        assert!(m.plan().is_err());
    }

    #[test]
    fn derived_scenario_anchors_fault() {
        let m = single("gps_deception");
        let plan = &m.plan().unwrap()[0];
        let f = m.scenario_for(plan, &ScenarioFile::default());
        assert_eq!(f.faults[0].phase, Some(Phase::LevelFlight));
        assert_eq!(f.faults[0].offset_s, Some(30.0));
        assert_eq!(f.end_after.unwrap().after_s, 120.0);
        Scenario::from_file(f, Path::new(".")).unwrap();
    }

    #[test]
    fn matrix_file_parses() {
        let m = CampaignMatrix::parse("base_seed = 7\n[[entries]]\nmodes = [\"all\"]\nphases = [\"glide_slope\"]\nseeds = 2\n").unwrap();
        assert_eq!(m.plan().unwrap().len(), 26);
        assert_eq!(m.plan().unwrap()[1].seed, 8);
    }
}
