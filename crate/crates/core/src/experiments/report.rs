//! Experiment reports: metrics with explicit tolerances and a verdict that
//! is recomputed from them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::round_sig;

/// Version of the report JSON layout (see `schemas/experiment_report.json`).
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Acceptance rule for one metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Tolerance {
    /// `|value - target| <= tol`
    Abs { target: f64, tol: f64 },
    /// `|value - target| <= tol·|target|`
    Rel { target: f64, tol: f64 },
    /// `value <= bound`
    AtMost { bound: f64 },
    /// `value < bound`
    Below { bound: f64 },
    /// `value >= bound`
    AtLeast { bound: f64 },
    /// `value > bound`
    Above { bound: f64 },
}

impl Tolerance {
    pub fn accepts(&self, value: f64) -> bool {
        if !value.is_finite() {
            return false;
        }
        match *self {
            Tolerance::Abs { target, tol } => (value - target).abs() <= tol,
            Tolerance::Rel { target, tol } => (value - target).abs() <= tol * target.abs(),
            Tolerance::AtMost { bound } => value <= bound,
            Tolerance::Below { bound } => value < bound,
            Tolerance::AtLeast { bound } => value >= bound,
            Tolerance::Above { bound } => value > bound,
        }
    }

    fn rounded(self) -> Self {
        match self {
            Tolerance::Abs { target, tol } => Tolerance::Abs { target: round_sig(target), tol: round_sig(tol) },
            Tolerance::Rel { target, tol } => Tolerance::Rel { target: round_sig(target), tol: round_sig(tol) },
            Tolerance::AtMost { bound } => Tolerance::AtMost { bound: round_sig(bound) },
            Tolerance::Below { bound } => Tolerance::Below { bound: round_sig(bound) },
            Tolerance::AtLeast { bound } => Tolerance::AtLeast { bound: round_sig(bound) },
            Tolerance::Above { bound } => Tolerance::Above { bound: round_sig(bound) },
        }
    }
}

/// A named value with its tolerance. Values are stored at 12 significant
/// digits and `passed` is computed from the stored value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub name: String,
    /// Non-finite values are written as `null` and read back as NaN.
    #[serde(deserialize_with = "nullable_f64")]
    pub value: f64,
    pub tolerance: Tolerance,
    pub passed: bool,
}

fn nullable_f64<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

impl Metric {
    pub fn new(name: impl Into<String>, value: f64, tolerance: Tolerance) -> Self {
        let value = round_sig(value);
        let tolerance = tolerance.rounded();
        Metric { name: name.into(), value, passed: tolerance.accepts(value), tolerance }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

/// Seeds, grids and parameters an experiment ran with.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub grids: BTreeMap<String, Vec<f64>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub parameters: BTreeMap<String, f64>,
}

impl Provenance {
    pub fn grid(mut self, name: &str, values: &[f64]) -> Self {
        self.grids.insert(name.into(), values.iter().map(|&v| round_sig(v)).collect());
        self
    }

    pub fn parameter(mut self, name: &str, value: f64) -> Self {
        self.parameters.insert(name.into(), round_sig(value));
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seeds.push(seed);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub experiment_id: String,
    pub spec_ids: Vec<String>,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skip_reason: Option<String>,
    pub metrics: Vec<Metric>,
    pub provenance: Provenance,
    /// Wall-clock seconds; left out when reports must be reproducible byte for byte.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime_seconds: Option<f64>,
}

impl ExperimentReport {
    pub fn new(experiment_id: &str, spec_ids: Vec<String>, metrics: Vec<Metric>, provenance: Provenance) -> Self {
        let mut report = ExperimentReport {
            schema_version: REPORT_SCHEMA_VERSION,
            experiment_id: experiment_id.into(),
            spec_ids,
            status: Status::Pass,
            skip_reason: None,
            metrics,
            provenance,
            runtime_seconds: None,
        };
        report.status = report.recompute_status();
        report
    }

    pub fn skipped(experiment_id: &str, spec_ids: Vec<String>, reason: impl Into<String>) -> Self {
        ExperimentReport {
            schema_version: REPORT_SCHEMA_VERSION,
            experiment_id: experiment_id.into(),
            spec_ids,
            status: Status::Skipped,
            skip_reason: Some(reason.into()),
            metrics: Vec::new(),
            provenance: Provenance::default(),
            runtime_seconds: None,
        }
    }

    /// Status implied by the metrics alone.
    pub fn recompute_status(&self) -> Status {
        if self.skip_reason.is_some() {
            Status::Skipped
        } else if self.metrics.iter().all(|m| m.tolerance.accepts(m.value)) {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    /// Whether stored verdicts agree with the stored values.
    pub fn is_consistent(&self) -> bool {
        self.metrics.iter().all(|m| m.passed == m.tolerance.accepts(m.value)) && self.status == self.recompute_status()
    }

    pub fn failing_metrics(&self) -> impl Iterator<Item = &Metric> {
        self.metrics.iter().filter(|m| !m.passed)
    }

    pub fn metric(&self, name: &str) -> Option<&Metric> {
        self.metrics.iter().find(|m| m.name == name)
    }
}

/// Tolerance overrides keyed by name; anything not set uses the experiment
/// default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Tolerances(pub BTreeMap<String, f64>);

/// Keys accepted by [`Tolerances`] and their defaults. `slope` and
/// `intercept` default per family.
pub const TOLERANCE_KEYS: &[(&str, Option<f64>)] = &[
    ("slope", None),
    ("intercept", None),
    ("closed_form", Some(1e-4)),
    ("gamma_density", Some(1e-3)),
    ("gamma_gap", Some(0.03)),
    ("divergence_ratio", Some(-10.0)),
    ("renyi_gap", Some(1e-3)),
    ("renyi_floor", Some(1e-6)),
    ("inequality_slack", Some(2e-4)),
    ("monotone_slack", Some(2e-4)),
    ("upper_bound_slack", Some(2e-4)),
    ("lss_exact", Some(1e-8)),
    ("limit_gamma", Some(0.05)),
    ("beta_hat", Some(0.05)),
    ("moment_stderr", Some(3.0)),
    ("moment_bound", Some(1.05)),
];

impl Tolerances {
    /// Parses `KEY=VALUE`, rejecting unknown keys.
    pub fn set_from_str(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Precondition(format!("tolerance override {assignment:?} is not KEY=VALUE")))?;
        let key = key.trim();
        if !TOLERANCE_KEYS.iter().any(|(k, _)| *k == key) {
            let known: Vec<&str> = TOLERANCE_KEYS.iter().map(|(k, _)| *k).collect();
            return Err(Error::Precondition(format!(
                "unknown tolerance key {key:?}; known keys: {}",
                known.join(", ")
            )));
        }
        let v: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Precondition(format!("tolerance {key} needs a number, got {value:?}")))?;
        if !v.is_finite() {
            return Err(Error::Precondition(format!("tolerance {key} must be finite")));
        }
        self.0.insert(key.to_string(), v);
        Ok(())
    }

    /// Override for `key`, else `default`.
    pub fn get_or(&self, key: &str, default: f64) -> f64 {
        self.0.get(key).copied().unwrap_or(default)
    }

    /// Override for `key`, else its table default.
    pub fn get(&self, key: &str) -> f64 {
        let default = TOLERANCE_KEYS
            .iter()
            .find(|(k, _)| *k == key)
            .and_then(|(_, d)| *d)
            .unwrap_or_else(|| panic!("tolerance {key} has no fixed default"));
        self.get_or(key, default)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdicts_follow_metrics() {
        let good = Metric::new("a", 0.5 + 1e-15, Tolerance::Abs { target: 0.5, tol: 1e-3 });
        let bad = Metric::new("b", 3.0, Tolerance::Below { bound: 3.0 });
        assert!(good.passed && !bad.passed);
        let report = ExperimentReport::new("x", vec![], vec![good.clone(), bad], Provenance::default());
        assert_eq!(report.status, Status::Fail);
        assert_eq!(report.failing_metrics().map(|m| m.name.as_str()).collect::<Vec<_>>(), ["b"]);
        let json = serde_json::to_string(&report).unwrap();
        let back: ExperimentReport = serde_json::from_str(&json).unwrap();
        assert!(back.is_consistent());
        assert_eq!(back, report);
        let pass = ExperimentReport::new("y", vec![], vec![good], Provenance::default());
        assert_eq!(pass.status, Status::Pass);
    }

    #[test]
    fn tampered_reports_are_detected() {
        let mut report = ExperimentReport::new(
            "x",
            vec![],
            vec![Metric::new("a", 1.0, Tolerance::AtMost { bound: 2.0 })],
            Provenance::default(),
        );
        report.metrics[0].value = 3.0;
        assert!(!report.is_consistent());
    }

    #[test]
    fn overrides() {
        let mut tol = Tolerances::default();
        tol.set_from_str("slope=1e-9").unwrap();
        assert_eq!(tol.get_or("slope", 0.02), 1e-9);
        assert_eq!(tol.get("renyi_gap"), 1e-3);
        assert!(tol.set_from_str("nonsense=1").is_err());
        assert!(tol.set_from_str("slope").is_err());
        assert!(tol.set_from_str("slope=abc").is_err());
    }
}
