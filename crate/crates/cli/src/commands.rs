//! Command implementations. Each reads a [`RunConfig`] and writes its
//! artifact to `--out` or stdout.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use levy_entropy::density::{density_grid, DEFAULT_POINTS};
use levy_entropy::entropy::{discrete_entropy, marginal_entropy, process_entropy, quantized_law};
use levy_entropy::experiments::{
    hierarchy_table, run_suite, Status, Suite, VerifyOptions, HIERARCHY_T_STAR, REPORT_SCHEMA_VERSION,
};
use levy_entropy::io::{fmt_sig, round_sig};
use levy_entropy::montecarlo::sample_increments;
use levy_entropy::process_model::{check_sector, estimate_bg_index, nominal_bg_index, ExponentEvaluator};
use levy_entropy::Error;
use serde_json::{json, Value};

use crate::config::{CommandKind, RunConfig, SampleFormat};

pub const DEFAULT_SAMPLE_COUNT: usize = 100_000;

/// What a successful run concluded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    VerificationFailed,
}

pub fn execute(config: &RunConfig) -> Result<Outcome> {
    match config.command {
        CommandKind::Describe => describe(config),
        CommandKind::Density => density(config),
        CommandKind::Entropy => entropy(config),
        CommandKind::Sample => sample(config),
        CommandKind::Verify => verify(config),
        CommandKind::Table => table(config),
    }
}

fn output(config: &RunConfig) -> Result<Box<dyn Write>> {
    Ok(match &config.out {
        Some(path) => {
            Box::new(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Rounds every float in a JSON tree to 12 significant digits.
fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64().and_then(|x| serde_json::Number::from_f64(round_sig(x))) {
                *n = x;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

/// Writes a JSON document, adding the run config and, unless disabled, a
/// timestamp.
fn write_json(config: &RunConfig, mut doc: Value, out: &mut dyn Write) -> Result<()> {
    let map = doc.as_object_mut().expect("documents are objects");
    map.insert("run_config".into(), serde_json::to_value(config)?);
    if config.timestamp {
        let now = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        map.insert("generated_at_unix".into(), json!(now));
    }
    round_floats(&mut doc);
    serde_json::to_writer_pretty(&mut *out, &doc)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

/// Frequencies for `describe`: `10^0, 10^0.5, …, 10^6`.
fn default_xi_grid() -> Vec<f64> {
    (0..=12).map(|k| 10f64.powf(k as f64 / 2.0)).collect()
}

fn describe(config: &RunConfig) -> Result<Outcome> {
    let spec = config.one_spec()?;
    let xi = config.grids.xi_grid.clone().unwrap_or_else(default_xi_grid);
    let ev = ExponentEvaluator::new(spec)?;
    let samples = xi
        .iter()
        .map(|&x| {
            let e = ev.eval(x)?;
            Ok(json!({ "xi": x, "re": e.psi.re, "im": e.psi.im, "abs_err": e.abs_err, "method": e.method }))
        })
        .collect::<levy_entropy::Result<Vec<_>>>()?;
    let sector_grid: Vec<f64> = xi.iter().copied().filter(|x| x.abs() >= 1.0).collect();
    let sector =
        if sector_grid.is_empty() { Value::Null } else { serde_json::to_value(check_sector(spec, &sector_grid)?)? };
    let bg = estimate_bg_index(spec)?;
    let doc = json!({
        "schema_version": 1,
        "spec_id": spec.id(),
        "spec": spec,
        "beta_hat": bg.beta_hat,
        "nominal_beta": nominal_bg_index(spec),
        "bg_fit": bg,
        "sector": sector,
        "psi": samples,
    });
    write_json(config, doc, &mut *output(config)?)?;
    Ok(Outcome::Success)
}

fn density(config: &RunConfig) -> Result<Outcome> {
    let spec = config.one_spec()?;
    let t = config.one_time()?;
    let grid = density_grid(spec, t, config.points.unwrap_or(DEFAULT_POINTS), config.x_range.map(|[a, b]| (a, b)))?;
    if grid.diagnostics.flagged {
        eprintln!(
            "warning: grid flagged (clipped mass {}, truncation {})",
            fmt_sig(grid.diagnostics.clipped_mass),
            grid.diagnostics.truncation_decay.map_or("n/a".into(), fmt_sig)
        );
    }
    let mut out = output(config)?;
    grid.write_csv(&mut out)?;
    out.flush()?;
    Ok(Outcome::Success)
}

/// `h(L_t)` over the t-grid, with `H([L_t]_m)` and the Rényi gap when one
/// `m` is given; or `H_{n,m}` over `--n × --m` when no t-grid is given.
fn entropy(config: &RunConfig) -> Result<Outcome> {
    let spec = config.one_spec()?;
    let mut out = output(config)?;
    match (&config.grids.t_grid, &config.grids.n_list) {
        (Some(ts), _) => {
            let m = match config.grids.m_list.as_deref() {
                None => None,
                Some([m]) => Some(*m),
                Some(_) => return Err(Error::Precondition("with --t-grid, --m takes a single value".into()).into()),
            };
            let rows = ts
                .iter()
                .map(|&t| {
                    let h = marginal_entropy(spec, t)?;
                    let quantized =
                        m.map(|m| quantized_law(spec, t, m).map(|law| discrete_entropy(&law))).transpose()?;
                    Ok((t, h, quantized))
                })
                .collect::<levy_entropy::Result<Vec<_>>>()?;
            match m {
                None => writeln!(out, "t,entropy,err,method")?,
                Some(_) => writeln!(out, "t,entropy,err,method,m,quantized_entropy,renyi_gap")?,
            }
            for (t, h, quantized) in rows {
                write!(out, "{},{},{},{}", fmt_sig(t), fmt_sig(h.value), fmt_sig(h.err), h.method.name())?;
                if let (Some(m), Some(q)) = (m, quantized) {
                    write!(out, ",{m},{},{}", fmt_sig(q), fmt_sig(q - f64::from(m).ln() - h.value))?;
                }
                writeln!(out)?;
            }
        }
        (None, Some(ns)) => {
            let ms = config.grids.m_list.clone().unwrap_or_else(|| vec![1]);
            writeln!(out, "n,m,process_entropy")?;
            for &n in ns {
                for &m in &ms {
                    writeln!(out, "{n},{m},{}", fmt_sig(process_entropy(spec, n, m)?))?;
                }
            }
        }
        (None, None) => {
            return Err(Error::Precondition("entropy needs --t-grid, or --n (with optional --m)".into()).into())
        }
    }
    out.flush()?;
    Ok(Outcome::Success)
}

fn sample(config: &RunConfig) -> Result<Outcome> {
    let spec = config.one_spec()?;
    let t = config.one_time()?;
    let batch = sample_increments(spec, t, config.count.unwrap_or(DEFAULT_SAMPLE_COUNT), config.seed)?;
    match config.format.unwrap_or(SampleFormat::Csv) {
        SampleFormat::Csv => {
            let mut out = output(config)?;
            batch.write_csv(&mut out)?;
            out.flush()?;
        }
        SampleFormat::Binary => {
            if config.out.is_none() {
                return Err(Error::Precondition("binary samples need --out".into()).into());
            }
            let mut out = output(config)?;
            batch.write_binary(&mut out)?;
            out.flush()?;
        }
    }
    Ok(Outcome::Success)
}

fn verify(config: &RunConfig) -> Result<Outcome> {
    let suite = config.suite.unwrap_or(Suite::All);
    let specs = if config.specs.is_empty() { levy_entropy::experiments::builtin_specs() } else { config.specs.clone() };
    let opts = VerifyOptions {
        seed: config.seed,
        tolerances: config.tolerances.clone(),
        t_grid: config.grids.t_grid.clone(),
        n_list: config.grids.n_list.clone(),
        m_list: config.grids.m_list.clone(),
        record_runtime: config.timestamp,
    };
    let reports = run_suite(suite, &specs, &opts)?;
    let passed = reports.iter().all(|r| r.status != Status::Fail);
    for r in &reports {
        let label = match r.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIP",
        };
        eprintln!("{label} {} [{}]", r.experiment_id, r.spec_ids.join("; "));
        if let Some(reason) = &r.skip_reason {
            eprintln!("    skipped: {reason}");
        }
        for m in r.failing_metrics() {
            eprintln!("    failing metric {} = {} ({:?})", m.name, fmt_sig(m.value), m.tolerance);
        }
    }
    let doc = json!({
        "schema_version": REPORT_SCHEMA_VERSION,
        "suite": suite,
        "all_passed": passed,
        "reports": reports,
    });
    write_json(config, doc, &mut *output(config)?)?;
    Ok(if passed { Outcome::Success } else { Outcome::VerificationFailed })
}

fn table(config: &RunConfig) -> Result<Outcome> {
    let specs = if config.specs.is_empty() { levy_entropy::experiments::builtin_specs() } else { config.specs.clone() };
    let (report, table) = hierarchy_table(&specs, config.t_star.unwrap_or(HIERARCHY_T_STAR), &config.tolerances)?;
    let mut out = output(config)?;
    table.write_csv(&mut out)?;
    out.flush()?;
    if let Some(path) = &config.report {
        let doc = json!({ "schema_version": REPORT_SCHEMA_VERSION, "reports": [report] });
        let mut file = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
        write_json(config, doc, &mut file)?;
    }
    for m in report.failing_metrics() {
        eprintln!("failing metric {} = {} ({:?})", m.name, fmt_sig(m.value), m.tolerance);
    }
    Ok(if report.status == Status::Fail { Outcome::VerificationFailed } else { Outcome::Success })
}
