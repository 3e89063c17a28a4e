//! Experiment suites: each check produces an [`ExperimentReport`] whose
//! verdict is recomputed from its metrics and tolerances.

mod ops;
mod report;
mod table;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::process_model::{nominal_bg_index, stable_limit_gamma, Family, ProcessSpec};

pub use ops::{
    default_intercept_tolerance, default_slope_tolerance, entropy_monotonicity, entropy_slope, fractional_moments,
    gamma_asymptotics, inequality_suite, lss_convergence, renyi_expansion, upper_bound_check, LSS_POINTS,
};
pub use report::{
    ExperimentReport, Metric, Provenance, Status, Tolerance, Tolerances, REPORT_SCHEMA_VERSION, TOLERANCE_KEYS,
};
pub use table::{hierarchy_table, HierarchyRow, HierarchyTable, TABLE_COLUMNS, TABLE_SCHEMA_VERSION};

/// Points in a default time grid (ratio ½).
pub const SLOPE_GRID_POINTS: usize = 10;
pub const LSS_TIMES: [f64; 3] = [0.1, 0.01, 0.001];
pub const RENYI_TIMES: [f64; 2] = [0.5, 1.0];
/// `m = 2^4 … 2^12`.
pub const RENYI_M: [u32; 9] = [16, 32, 64, 128, 256, 512, 1024, 2048, 4096];
pub const INEQUALITY_GRID: [u32; 4] = [1, 2, 4, 8];
pub const MOMENT_TIMES: [f64; 4] = [1.0, 0.1, 0.01, 0.001];
pub const GAMMA_GAP_TIMES: [f64; 3] = [0.1, 0.05, 0.01];
/// Shapes `τt` at which the gamma density path is checked.
pub const GAMMA_DENSITY_SHAPES: [f64; 3] = [1.2, 2.0, 4.0];
pub const HIERARCHY_T_STAR: f64 = 0.01;

/// The processes `verify` runs on when none are given.
pub fn builtin_specs() -> Vec<ProcessSpec> {
    [
        ProcessSpec::wiener(1.0, 0.0),
        ProcessSpec::sas(0.5, 1.0),
        ProcessSpec::sas(1.0, 1.0),
        ProcessSpec::sas(1.5, 1.0),
        ProcessSpec::sas(2.0, 1.0),
        ProcessSpec::gamma(1.0, 1.0),
        ProcessSpec::laplace(1.0),
        ProcessSpec::layered_stable(0.8, 1.6, 1.0, 1.0),
        ProcessSpec::tempered_stable(1.2, 1.0, 1.0, 1.0),
    ]
    .into_iter()
    .map(|s| s.expect("built-in parameters are valid"))
    .collect()
}

/// `2^-first, 2^-(first+1), …` with `points` entries.
pub fn halving_grid(first: i32, points: usize) -> Vec<f64> {
    (0..points as i32).map(|k| 0.5f64.powi(first + k)).collect()
}

/// Default slope grid: `2^-1 … 2^-10`, except for the jump-kernel families,
/// whose entropies only settle onto the limiting slope below about `2^-10`;
/// they get `2^-11 … 2^-20`.
pub fn default_slope_grid(spec: &ProcessSpec) -> Vec<f64> {
    match spec.family() {
        Family::LayeredStable | Family::TemperedStable => halving_grid(11, SLOPE_GRID_POINTS),
        _ => halving_grid(1, SLOPE_GRID_POINTS),
    }
}

/// `0.1, 0.2, …, 1.0`.
pub fn monotone_grid() -> Vec<f64> {
    (1..=10).map(|k| k as f64 / 10.0).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    EntropySlope,
    LssConvergence,
    UpperBoundCheck,
    InequalitySuite,
    RenyiExpansion,
    EntropyMonotonicity,
    GammaAsymptotics,
    FractionalMoments,
    HierarchyTable,
}

impl Experiment {
    pub fn id(self) -> &'static str {
        match self {
            Self::EntropySlope => "entropy_slope",
            Self::LssConvergence => "lss_convergence",
            Self::UpperBoundCheck => "upper_bound_check",
            Self::InequalitySuite => "inequality_suite",
            Self::RenyiExpansion => "renyi_expansion",
            Self::EntropyMonotonicity => "entropy_monotonicity",
            Self::GammaAsymptotics => "gamma_asymptotics",
            Self::FractionalMoments => "fractional_moments",
            Self::HierarchyTable => "hierarchy_table",
        }
    }

    /// Why the experiment does not apply to `spec`, if it does not.
    pub fn skip_reason(self, spec: &ProcessSpec) -> Option<String> {
        let zero_index = nominal_bg_index(spec) == 0.0;
        match self {
            Self::EntropySlope if zero_index => {
                Some("index 0: h(L_t) falls faster than any multiple of log t, so there is no slope".into())
            }
            Self::LssConvergence if zero_index || stable_limit_gamma(spec).is_none() => {
                Some("index 0: the rescaled process converges in law to 0, not to a stable process".into())
            }
            Self::GammaAsymptotics if spec.family() != Family::Gamma => Some("applies to the Gamma family only".into()),
            Self::FractionalMoments if zero_index => Some("index 0: there is no non-degenerate rescaling".into()),
            Self::FractionalMoments if matches!(spec.family(), Family::LayeredStable | Family::TemperedStable) => {
                Some(format!("no exact sampler for the {} family", spec.family()))
            }
            _ => None,
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// Named groups of experiments accepted by `verify`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Slope,
    Lss,
    UpperBound,
    Inequality,
    Renyi,
    Monotone,
    Gamma,
    Moments,
    Hierarchy,
    All,
}

pub const SUITE_NAMES: [&str; 10] =
    ["slope", "lss", "upper_bound", "inequality", "renyi", "monotone", "gamma", "moments", "hierarchy", "all"];

impl Suite {
    pub fn experiments(self) -> Vec<Experiment> {
        use Experiment::*;
        match self {
            Suite::Slope => vec![EntropySlope],
            Suite::Lss => vec![LssConvergence],
            Suite::UpperBound => vec![UpperBoundCheck],
            Suite::Inequality => vec![InequalitySuite],
            Suite::Renyi => vec![RenyiExpansion],
            Suite::Monotone => vec![EntropyMonotonicity],
            Suite::Gamma => vec![GammaAsymptotics],
            Suite::Moments => vec![FractionalMoments],
            Suite::Hierarchy => vec![HierarchyTable],
            Suite::All => vec![
                EntropySlope,
                LssConvergence,
                UpperBoundCheck,
                InequalitySuite,
                RenyiExpansion,
                EntropyMonotonicity,
                GammaAsymptotics,
                FractionalMoments,
                HierarchyTable,
            ],
        }
    }

    pub fn name(self) -> &'static str {
        SUITE_NAMES[self as usize]
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        use Suite::*;
        let all = [Slope, Lss, UpperBound, Inequality, Renyi, Monotone, Gamma, Moments, Hierarchy, All];
        all.into_iter().find(|suite| suite.name() == s).ok_or_else(|| {
            Error::Precondition(format!("unknown suite {s:?}; expected one of {}", SUITE_NAMES.join(", ")))
        })
    }
}

/// Grid overrides and tolerances for a suite run. Unset grids use each
/// experiment's default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Replaces the slope, upper-bound and monotonicity time grids.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<u32>>,
    /// Replaces the quantization grids of the inequality and Rényi checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_list: Option<Vec<u32>>,
    /// Store wall-clock runtimes in the reports.
    #[serde(default)]
    pub record_runtime: bool,
}

/// Runs one experiment on one process with the default grids.
pub fn run_experiment(experiment: Experiment, spec: &ProcessSpec, opts: &VerifyOptions) -> Result<ExperimentReport> {
    if let Some(reason) = experiment.skip_reason(spec) {
        return Ok(ExperimentReport::skipped(experiment.id(), vec![spec.id()], reason));
    }
    let tol = &opts.tolerances;
    let start = Instant::now();
    let mut report = match experiment {
        Experiment::EntropySlope => {
            entropy_slope(spec, opts.t_grid.as_deref().unwrap_or(&default_slope_grid(spec)), tol)?
        }
        Experiment::LssConvergence => lss_convergence(spec, nominal_bg_index(spec), &LSS_TIMES, tol)?,
        Experiment::UpperBoundCheck => {
            let beta = nominal_bg_index(spec);
            let probe = if beta > 0.0 { 1.2 * beta } else { 1.0 };
            upper_bound_check(spec, probe, opts.t_grid.as_deref().unwrap_or(&default_slope_grid(spec)), tol)?
        }
        Experiment::InequalitySuite => inequality_suite(
            spec,
            opts.n_list.as_deref().unwrap_or(&INEQUALITY_GRID),
            opts.m_list.as_deref().unwrap_or(&INEQUALITY_GRID),
            tol,
        )?,
        Experiment::RenyiExpansion => {
            renyi_expansion(spec, &RENYI_TIMES, opts.m_list.as_deref().unwrap_or(&RENYI_M), tol)?
        }
        Experiment::EntropyMonotonicity => {
            entropy_monotonicity(spec, opts.t_grid.as_deref().unwrap_or(&monotone_grid()), tol)?
        }
        Experiment::GammaAsymptotics => {
            let ProcessSpec::Gamma { tau, .. } = *spec else { unreachable!("skipped above") };
            let density_times: Vec<f64> = GAMMA_DENSITY_SHAPES.iter().map(|k| k / tau).collect();
            gamma_asymptotics(spec, &density_times, &GAMMA_GAP_TIMES, tol)?
        }
        Experiment::FractionalMoments => {
            let q = nominal_bg_index(spec).min(1.0) / 2.0;
            fractional_moments(spec, q, &MOMENT_TIMES, opts.seed, tol)?
        }
        Experiment::HierarchyTable => hierarchy_table(std::slice::from_ref(spec), HIERARCHY_T_STAR, tol)?.0,
    };
    if opts.record_runtime {
        report.runtime_seconds = Some(start.elapsed().as_secs_f64());
    }
    Ok(report)
}

/// Runs every experiment of `suite` on every process, in order. The
/// hierarchy table is built once over all processes.
pub fn run_suite(suite: Suite, specs: &[ProcessSpec], opts: &VerifyOptions) -> Result<Vec<ExperimentReport>> {
    if specs.is_empty() {
        return Err(Error::Precondition("no processes to verify".into()));
    }
    let mut reports = Vec::new();
    for experiment in suite.experiments() {
        if experiment == Experiment::HierarchyTable {
            let start = Instant::now();
            let (mut report, _) = hierarchy_table(specs, HIERARCHY_T_STAR, &opts.tolerances)?;
            if opts.record_runtime {
                report.runtime_seconds = Some(start.elapsed().as_secs_f64());
            }
            reports.push(report);
            continue;
        }
        for spec in specs {
            reports.push(run_experiment(experiment, spec, opts)?);
        }
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_parse() {
        for name in SUITE_NAMES {
            assert_eq!(name.parse::<Suite>().unwrap().name(), name);
        }
        assert!("everything".parse::<Suite>().is_err());
        assert_eq!(Suite::All.experiments().len(), 9);
    }

    #[test]
    fn skip_reasons() {
        let gamma = ProcessSpec::gamma(1.0, 1.0).unwrap();
        assert!(Experiment::LssConvergence.skip_reason(&gamma).unwrap().contains("converges in law to 0"));
        assert!(Experiment::GammaAsymptotics.skip_reason(&gamma).is_none());
        let layered = ProcessSpec::layered_stable(0.8, 1.6, 1.0, 1.0).unwrap();
        assert!(Experiment::FractionalMoments.skip_reason(&layered).is_some());
        assert!(Experiment::LssConvergence.skip_reason(&layered).is_none());
        let r = run_experiment(Experiment::LssConvergence, &gamma, &VerifyOptions::default()).unwrap();
        assert_eq!(r.status, Status::Skipped);
    }

    #[test]
    fn default_grids() {
        let g = default_slope_grid(&ProcessSpec::sas(1.0, 1.0).unwrap());
        assert_eq!(g.len(), 10);
        assert_eq!((g[0], g[9]), (0.5, 0.5f64.powi(10)));
        let g = default_slope_grid(&ProcessSpec::tempered_stable(1.2, 1.0, 1.0, 1.0).unwrap());
        assert_eq!(g[0], 0.5f64.powi(11));
        assert_eq!(monotone_grid().len(), 10);
    }
}
