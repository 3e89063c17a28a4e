//! Run configurations: everything a command needs, in a form that can be
//! saved and replayed.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use levy_entropy::experiments::{builtin_specs, Suite, Tolerances};
use levy_entropy::{Error, ProcessSpec};
use serde::{Deserialize, Serialize};

pub const RUN_CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandKind {
    Describe,
    Density,
    Entropy,
    Sample,
    Verify,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SampleFormat {
    Csv,
    Binary,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grids {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_list: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi_grid: Option<Vec<f64>>,
}

/// A fully resolved command line. Specs are stored inline, so replaying a
/// saved config does not depend on the files it was first read from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub command: CommandKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suite: Option<Suite>,
    pub specs: Vec<ProcessSpec>,
    #[serde(default)]
    pub grids: Grids,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Include wall-clock fields (timestamps, runtimes) in JSON output.
    #[serde(default)]
    pub timestamp: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_range: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<SampleFormat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_star: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(command: CommandKind) -> Self {
        RunConfig {
            version: RUN_CONFIG_VERSION,
            command,
            suite: None,
            specs: Vec::new(),
            grids: Grids::default(),
            seed: 0,
            out: None,
            tolerances: Tolerances::default(),
            timestamp: true,
            points: None,
            x_range: None,
            count: None,
            format: None,
            t_star: None,
            report: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading run config {}", path.display()))?;
        let config: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Precondition(format!("run config {}: {e}", path.display())))?;
        if config.version != RUN_CONFIG_VERSION {
            return Err(Error::Precondition(format!("unsupported run config version {}", config.version)).into());
        }
        Ok(config)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text).with_context(|| format!("writing run config {}", path.display()))?;
        Ok(())
    }

    /// The single spec a command works on.
    pub fn one_spec(&self) -> Result<&ProcessSpec> {
        match self.specs.as_slice() {
            [spec] => Ok(spec),
            [] => Err(Error::Precondition("--spec is required".into()).into()),
            _ => Err(Error::Precondition("this command takes exactly one --spec".into()).into()),
        }
    }

    /// The single time a command works on, taken from the t-grid.
    pub fn one_time(&self) -> Result<f64> {
        match self.grids.t_grid.as_deref() {
            Some([t]) => Ok(*t),
            None => Err(Error::Precondition("--t-grid with a single time is required".into()).into()),
            Some(_) => Err(Error::Precondition("this command takes a single time in --t-grid".into()).into()),
        }
    }
}

/// Resolves one `--spec` value: inline JSON, `builtins`, or a path to a file
/// holding one spec or an array of specs.
pub fn load_specs(value: &str) -> Result<Vec<ProcessSpec>> {
    let trimmed = value.trim();
    if trimmed == "builtins" {
        return Ok(builtin_specs());
    }
    let (text, origin) = if trimmed.starts_with('{') || trimmed.starts_with('[') {
        (trimmed.to_string(), "inline spec".to_string())
    } else {
        let text = fs::read_to_string(trimmed)
            .map_err(|e| Error::Precondition(format!("cannot read spec file {trimmed}: {e}")))?;
        (text, format!("spec file {trimmed}"))
    };
    let parsed = if text.trim_start().starts_with('[') {
        serde_json::from_str::<Vec<serde_json::Value>>(&text)
            .map_err(|e| Error::InvalidSpec(format!("{origin}: {e}")))?
            .into_iter()
            .map(|v| ProcessSpec::from_json(&v.to_string()))
            .collect::<levy_entropy::Result<Vec<_>>>()
    } else {
        ProcessSpec::from_json(&text).map(|s| vec![s])
    };
    Ok(parsed.with_context(|| origin)?)
}

/// Parses `a,b,c` or `geom:START:RATIO:COUNT`.
pub fn parse_times(text: &str) -> Result<Vec<f64>> {
    let values = if let Some(rest) = text.strip_prefix("geom:") {
        let parts: Vec<&str> = rest.split(':').collect();
        let [start, ratio, count] = parts.as_slice() else {
            bail!(Error::Precondition(format!("geometric grid {text:?} is not geom:START:RATIO:COUNT")));
        };
        let (start, ratio, count) =
            (number(start)?, number(ratio)?, count.trim().parse::<usize>().map_err(|_| bad_number(count))?);
        (0..count).map(|k| start * ratio.powi(k as i32)).collect()
    } else {
        text.split(',').map(number).collect::<Result<Vec<_>>>()?
    };
    if values.is_empty() || values.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        bail!(Error::Precondition(format!("times must be positive and finite: {text:?}")));
    }
    Ok(values)
}

pub fn parse_positive_list(text: &str) -> Result<Vec<u32>> {
    let values =
        text.split(',').map(|s| s.trim().parse::<u32>().map_err(|_| bad_number(s))).collect::<Result<Vec<_>>>()?;
    if values.contains(&0) {
        bail!(Error::Precondition(format!("list entries must be at least 1: {text:?}")));
    }
    Ok(values)
}

pub fn parse_reals(text: &str) -> Result<Vec<f64>> {
    text.split(',').map(number).collect()
}

fn number(s: &str) -> Result<f64> {
    let v: f64 = s.trim().parse().map_err(|_| bad_number(s))?;
    if !v.is_finite() {
        return Err(bad_number(s));
    }
    Ok(v)
}

fn bad_number(s: &str) -> anyhow::Error {
    Error::Precondition(format!("not a number: {s:?}")).into()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_times("0.5, 0.25").unwrap(), vec![0.5, 0.25]);
        let g = parse_times("geom:0.5:0.5:10").unwrap();
        assert_eq!(g.len(), 10);
        assert_eq!(g[9], 0.5f64.powi(10));
        assert!(parse_times("0.5,-1").is_err());
        assert!(parse_times("geom:1:2").is_err());
        assert_eq!(parse_positive_list("1,2,8").unwrap(), vec![1, 2, 8]);
        assert!(parse_positive_list("0,2").is_err());
    }

    #[test]
    fn inline_and_builtin_specs() {
        let s = load_specs(r#"{"family":"SaS","params":{"alpha":1.5,"gamma":1}}"#).unwrap();
        assert_eq!(s, vec![ProcessSpec::sas(1.5, 1.0).unwrap()]);
        assert_eq!(load_specs("builtins").unwrap().len(), builtin_specs().len());
        let two = load_specs(
            r#"[{"family":"Laplace","params":{"scale":1}},{"family":"Gamma","params":{"theta":1,"tau":2}}]"#,
        )
        .unwrap();
        assert_eq!(two.len(), 2);
        assert!(load_specs(r#"{"family":"SaS","params":{"alpha":3,"gamma":1}}"#).is_err());
    }

    #[test]
    fn config_round_trip() {
        let mut c = RunConfig::new(CommandKind::Verify);
        c.suite = Some(Suite::Lss);
        c.specs = vec![ProcessSpec::gamma(1.0, 1.0).unwrap()];
        c.tolerances.set_from_str("slope=1e-9").unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        c.save(&path).unwrap();
        assert_eq!(RunConfig::load(&path).unwrap(), c);
    }
}
