//! The compressibility hierarchy: processes ordered by index, with their
//! entropy slopes and small-time entropies.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::marginal_entropy;
use crate::error::{Error, Result};
use crate::io::{fmt_sig, round_sig};
use crate::process_model::{estimate_bg_index, nominal_bg_index, Family, ProcessSpec};
use crate::stats::linear_fit;

use super::report::{ExperimentReport, Metric, Provenance, Tolerance, Tolerances};
use super::SLOPE_GRID_POINTS;

/// Version of the CSV layout (see `schemas/hierarchy_table.json`).
pub const TABLE_SCHEMA_VERSION: u32 = 1;
pub const TABLE_COLUMNS: [&str; 6] = ["family", "spec_id", "beta_hat", "nominal_beta", "slope", "entropy"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchyRow {
    pub family: String,
    pub spec_id: String,
    pub beta_hat: f64,
    pub nominal_beta: f64,
    /// Least-squares slope of `h(L_t)` against `log t` on `2^-1 … 2^-10`.
    pub slope: f64,
    /// `h(L_{t*})`.
    pub entropy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchyTable {
    pub t_star: f64,
    /// Sorted by `beta_hat`, then entropy.
    pub rows: Vec<HierarchyRow>,
}

impl HierarchyTable {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| Error::Serialization(e.to_string());
        w.write_record(TABLE_COLUMNS).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record([
                r.family.clone(),
                r.spec_id.clone(),
                fmt_sig(r.beta_hat),
                fmt_sig(r.nominal_beta),
                fmt_sig(r.slope),
                fmt_sig(r.entropy),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn row(spec: &ProcessSpec, t_star: f64) -> Result<HierarchyRow> {
    let bg = estimate_bg_index(spec)?;
    let ts: Vec<f64> = (1..=SLOPE_GRID_POINTS as i32).map(|k| 0.5f64.powi(k)).collect();
    let h = ts.iter().map(|&t| marginal_entropy(spec, t).map(|e| e.value)).collect::<Result<Vec<_>>>()?;
    let log_t: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    Ok(HierarchyRow {
        family: spec.family().to_string(),
        spec_id: spec.id(),
        beta_hat: round_sig(bg.beta_hat),
        nominal_beta: nominal_bg_index(spec),
        slope: round_sig(linear_fit(&log_t, &h).slope),
        entropy: round_sig(marginal_entropy(spec, t_star)?.value),
    })
}

/// Builds the table and checks it: every `β̂` near its nominal index, and
/// `h(L_{t*})` increasing along gamma, SaS(0.5), SaS(1), Wiener for those of
/// them present in `specs`.
pub fn hierarchy_table(
    specs: &[ProcessSpec],
    t_star: f64,
    tol: &Tolerances,
) -> Result<(ExperimentReport, HierarchyTable)> {
    if specs.is_empty() {
        return Err(Error::Precondition("hierarchy_table needs at least one process".into()));
    }
    if !(t_star > 0.0 && t_star.is_finite()) {
        return Err(Error::Precondition(format!("t* must be positive and finite, got {t_star}")));
    }
    let mut rows: Vec<HierarchyRow> = specs.par_iter().map(|s| row(s, t_star)).collect::<Result<_>>()?;
    rows.sort_by(|a, b| a.beta_hat.total_cmp(&b.beta_hat).then(a.entropy.total_cmp(&b.entropy)));

    let mut metrics: Vec<Metric> = rows
        .iter()
        .map(|r| {
            Metric::new(
                format!("beta_hat[{}]", r.spec_id),
                r.beta_hat,
                Tolerance::Abs { target: r.nominal_beta, tol: tol.get("beta_hat") },
            )
        })
        .collect();
    let find = |pred: &dyn Fn(&ProcessSpec) -> bool| specs.iter().position(pred);
    let chain = [
        find(&|s| s.family() == Family::Gamma),
        find(&|s| matches!(s, ProcessSpec::SaS { alpha, .. } if *alpha == 0.5)),
        find(&|s| matches!(s, ProcessSpec::SaS { alpha, .. } if *alpha == 1.0)),
        find(&|s| s.family() == Family::Wiener),
    ];
    let present: Vec<&ProcessSpec> = chain.iter().flatten().map(|&i| &specs[i]).collect();
    let entropy_of = |s: &ProcessSpec| rows.iter().find(|r| r.spec_id == s.id()).expect("row per spec").entropy;
    for w in present.windows(2) {
        metrics.push(Metric::new(
            format!("entropy_order[{} < {}]", w[0].id(), w[1].id()),
            entropy_of(w[1]) - entropy_of(w[0]),
            Tolerance::Above { bound: 0.0 },
        ));
    }
    let provenance = Provenance::default().parameter("t_star", t_star);
    let report =
        ExperimentReport::new("hierarchy_table", specs.iter().map(ProcessSpec::id).collect(), metrics, provenance);
    Ok((report, HierarchyTable { t_star, rows }))
}
