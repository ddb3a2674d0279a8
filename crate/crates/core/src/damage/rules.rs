//! Ordered rule base and the classifier.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::features::FeatureVector;
use crate::error::{Error, Result};
use crate::faultlab::{FaultKind, FaultLocation};

const DEFAULT_RULES: &str = include_str!("default_rules.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Op {
    Lt,
    Le,
    Gt,
    Ge,
    AbsLt,
    AbsGt,
}

impl Op {
    fn holds(self, x: f64, v: f64) -> bool {
        match self {
            Op::Lt => x < v,
            Op::Le => x <= v,
            Op::Gt => x > v,
            Op::Ge => x >= v,
            Op::AbsLt => x.abs() < v,
            Op::AbsGt => x.abs() > v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Condition {
    pub feature: String,
    pub op: Op,
    pub value: f64,
}

impl Condition {
    fn holds(&self, fv: &FeatureVector) -> bool {
        fv.get(&self.feature).is_some_and(|x| self.op.holds(x, self.value))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissionImpact {
    None,
    Degraded,
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlatformDamage {
    None,
    Minor,
    Delayed,
    Destroyed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Capability {
    CanAttack,
    CannotAttack,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rule {
    pub name: String,
    pub location: FaultLocation,
    pub mode: FaultKind,
    #[serde(default = "one")]
    pub min_windows: usize,
    pub mission_impact: MissionImpact,
    pub platform_damage: PlatformDamage,
    pub capability: Capability,
    pub trend: String,
    pub when: Vec<Condition>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleSettings {
    pub window_s: f64,
    pub stride_s: f64,
    pub baseline_windows: usize,
    pub onset_lookback_windows: usize,
    pub onset_sigma: f64,
    pub impact_altitude_m: f64,
    pub overspeed_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleBase {
    pub settings: RuleSettings,
    #[serde(rename = "rule")]
    pub rules: Vec<Rule>,
}

impl Default for RuleBase {
    fn default() -> Self {
        RuleBase::parse(DEFAULT_RULES, "default rules").expect("built-in rule base is valid")
    }
}

impl RuleBase {
    pub fn parse(text: &str, source_name: &str) -> Result<Self> {
        let rb: RuleBase = toml::from_str(text).map_err(|e| Error::Parse {
            source_name: source_name.to_string(),
            line: e
                .span()
                .map_or(0, |s| text[..s.start.min(text.len())].lines().count().max(1)),
            message: e.message().to_string(),
        })?;
        rb.validate()?;
        Ok(rb)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("rule base serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.settings;
        if !(s.window_s > 0.0 && s.stride_s > 0.0 && s.onset_sigma > 0.0) {
            return Err(Error::Config("window, stride and onset sigma must be positive".into()));
        }
        if s.baseline_windows == 0 {
            return Err(Error::Config("baseline_windows must be at least 1".into()));
        }
        if self.rules.is_empty() {
            return Err(Error::Config("rule base has no rules".into()));
        }
        for r in &self.rules {
            let err = |m: String| Error::Config(format!("rule `{}`: {m}", r.name));
            if r.when.is_empty() {
                return Err(err("no conditions".into()));
            }
            if r.min_windows == 0 {
                return Err(err("min_windows must be at least 1".into()));
            }
            if r.mode.location() != r.location {
                return Err(err(format!(
                    "mode {} belongs to {}, not {}",
                    r.mode.name(),
                    r.mode.location().name(),
                    r.location.name()
                )));
            }
            for c in &r.when {
                if !FeatureVector::NAMES.contains(&c.feature.as_str()) {
                    return Err(err(format!("unknown feature `{}`", c.feature)));
                }
                if !c.value.is_finite() {
                    return Err(err(format!("threshold for `{}` is not finite", c.feature)));
                }
            }
        }
        Ok(())
    }

    /// Fault kinds with no rule.
    pub fn uncovered(&self) -> Vec<FaultKind> {
        FaultKind::ALL
            .into_iter()
            .filter(|k| !self.rules.iter().any(|r| r.mode == *k))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DamageReport {
    pub location: FaultLocation,
    pub mode: Option<FaultKind>,
    pub rule: Option<String>,
    pub onset_s: Option<f64>,
    pub mission_impact: MissionImpact,
    pub platform_damage: PlatformDamage,
    pub trend: String,
    pub residual_capability: Capability,
    pub glide_km: Option<f64>,
}

impl DamageReport {
    pub fn nominal() -> Self {
        DamageReport {
            location: FaultLocation::None,
            mode: None,
            rule: None,
            onset_s: None,
            mission_impact: MissionImpact::None,
            platform_damage: PlatformDamage::None,
            trend: "no anomaly".into(),
            residual_capability: Capability::CanAttack,
            glide_km: None,
        }
    }
}

/// Index of the first window ending a run of `min` consecutive matches.
fn first_match(rule: &Rule, features: &[FeatureVector]) -> Option<usize> {
    let mut run = 0;
    for (i, fv) in features.iter().enumerate() {
        if rule.when.iter().all(|c| c.holds(fv)) {
            run += 1;
            if run >= rule.min_windows {
                return Some(i + 1 - run);
            }
        } else {
            run = 0;
        }
    }
    None
}

/// Change-point estimate: the first window where a feature the rule looks
/// at leaves its baseline by more than `onset_sigma` standard deviations
/// while the rule's conditions hold.
/// The baseline is the `baseline_windows` windows that precede the matched
/// window by `onset_lookback_windows`. Falls back to the matched window.
fn onset(rule: &Rule, features: &[FeatureVector], matched: usize, s: &RuleSettings) -> f64 {
    let mid = |fv: &FeatureVector| 0.5 * (fv.t_start + fv.t_end);
    let search_from = matched.saturating_sub(s.onset_lookback_windows);
    let b0 = search_from.saturating_sub(s.baseline_windows);
    if search_from == b0 {
        return mid(&features[matched]);
    }
    let base = &features[b0..search_from];
    let stats: Vec<(f64, f64)> = rule
        .when
        .iter()
        .map(|c| {
            let v: Vec<f64> = base.iter().filter_map(|f| f.get(&c.feature)).collect();
            let m = v.iter().sum::<f64>() / v.len() as f64;
            let sd = (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64).sqrt();
            (m, sd.max(1e-3 * (1.0 + m.abs())))
        })
        .collect();
    features[search_from..=matched]
        .iter()
        .find(|fv| {
            rule.when.iter().all(|c| c.holds(fv))
                && rule.when.iter().zip(&stats).any(|(c, (m, sd))| {
                    fv.get(&c.feature).is_some_and(|x| (x - m).abs() > s.onset_sigma * sd)
                })
        })
        .map_or_else(|| mid(&features[matched]), mid)
}

/// First-match classification of a feature sequence.
pub fn classify(features: &[FeatureVector], rules: &RuleBase) -> DamageReport {
    if features.is_empty() {
        return DamageReport::nominal();
    }
    let Some((rule, at)) = rules
        .rules
        .iter()
        .find_map(|r| first_match(r, features).map(|i| (r, i)))
    else {
        return DamageReport::nominal();
    };
    let s = &rules.settings;
    let mut report = DamageReport {
        location: rule.location,
        mode: Some(rule.mode),
        rule: Some(rule.name.clone()),
        onset_s: Some(onset(rule, features, at, s)),
        mission_impact: rule.mission_impact,
        platform_damage: rule.platform_damage,
        trend: rule.trend.clone(),
        residual_capability: rule.capability,
        glide_km: None,
    };
    let (first, last) = (&features[0], &features[features.len() - 1]);
    let impact = last.gps_alt_mean < s.impact_altitude_m
        && last.ground_speed_mean > s.overspeed_ratio * first.ground_speed_mean;
    if impact {
        report.platform_damage = PlatformDamage::Destroyed;
        report.mission_impact = MissionImpact::Failed;
        report.residual_capability = Capability::CannotAttack;
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quiet(n: usize) -> Vec<FeatureVector> {
        (0..n)
            .map(|i| FeatureVector {
                t_start: i as f64,
                t_end: i as f64 + 2.0,
                imu_health_min: 1.0,
                sats_min: 15.0,
                surface_gain: 1.0,
                gps_alt_mean: 400.0,
                ground_speed_mean: 40.0,
                gps_gap: 0.1,
                ..FeatureVector::default()
            })
            .collect()
    }

    #[test]
    fn default_rules_cover_every_fault_kind() {
        let rb = RuleBase::default();
        assert!(rb.uncovered().is_empty(), "{:?}", rb.uncovered());
    }

    #[test]
    fn default_rules_round_trip() {
        let rb = RuleBase::default();
        let again = RuleBase::parse(&rb.to_toml(), "round trip").unwrap();
        assert_eq!(rb, again);
    }

    #[test]
    fn quiet_features_are_nominal() {
        let r = classify(&quiet(60), &RuleBase::default());
        assert_eq!(r, DamageReport::nominal());
        assert_eq!(r.location, FaultLocation::None);
        assert!(r.mode.is_none());
    }

    #[test]
    fn first_match_wins_and_onset_is_located() {
        let mut f = quiet(60);
        for fv in &mut f[30..] {
            fv.gps_gap = 2.0;
            fv.sats_min = 0.0;
        }
        let r = classify(&f, &RuleBase::default());
        assert_eq!(r.mode, Some(FaultKind::GpsInterruption));
        assert_eq!(r.location, FaultLocation::Gps);
        assert_eq!(r.onset_s, Some(31.0));
    }

    #[test]
    fn ground_impact_overrides_damage() {
        let mut f = quiet(20);
        for fv in &mut f[10..] {
            fv.surface_offset = -2.0;
        }
        let last = f.last_mut().unwrap();
        last.gps_alt_mean = 1.0;
        last.ground_speed_mean = 50.0;
        let r = classify(&f, &RuleBase::default());
        assert_eq!(r.mode, Some(FaultKind::ServoConstantDeviation));
        assert_eq!(r.platform_damage, PlatformDamage::Destroyed);
    }

    #[test]
    fn validation_catches_mistakes() {
        let base = RuleBase::default().to_toml();
        let bad_feature = base.replacen("imu_health_min", "imu_health_max", 1);
        assert!(RuleBase::parse(&bad_feature, "t").is_err());
        let bad_location = base.replacen("location = \"imu\"", "location = \"gps\"", 1);
        assert!(RuleBase::parse(&bad_location, "t").is_err());
        let err = RuleBase::parse("[settings]\nwindow_s = 'x'\n", "t").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }
}
