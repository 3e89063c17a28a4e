//! One-sample Kolmogorov–Smirnov tests against the marginal laws.

use crate::density::pointwise;
use crate::error::{Error, Result};
use crate::process_model::ProcessSpec;
use crate::quadrature::{integrate, QuadOptions};

/// Outcome of a KS test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Asymptotic Kolmogorov survival function with the usual small-sample
/// correction `λ = (√n + 0.12 + 0.11/√n)·D`.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * lambda * lambda).exp();
        sum += if k as i64 % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// KS test of `samples` against the continuous CDF `cdf`.
pub fn ks_test(samples: &[f64], cdf: impl Fn(f64) -> f64) -> KsResult {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    let nf = n as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / nf).max((i + 1) as f64 / nf - f);
    }
    KsResult { statistic: d, p_value: ks_p_value(d, n), n }
}

/// CDF of `L_t`: closed form where available, otherwise a table built from
/// the pointwise density of a symmetric law.
pub enum MarginalCdf {
    Exact {
        spec: ProcessSpec,
        t: f64,
    },
    /// `values[j] = ∫_0^{x_j} p` on `x_j = scale·(e^{j·h} - 1)`.
    Table {
        scale: f64,
        h: f64,
        values: Vec<f64>,
    },
}

/// Cells in the tabulated half-line.
const TABLE_CELLS: usize = 1 << 14;

impl MarginalCdf {
    pub fn new(spec: &ProcessSpec, t: f64) -> Result<Self> {
        if pointwise::cdf(spec, t, 0.0).is_some() {
            return Ok(MarginalCdf::Exact { spec: *spec, t });
        }
        if !(spec.is_symmetric() && pointwise::has_pointwise_pdf(spec)) {
            return Err(Error::Unsupported { family: spec.family().to_string(), operation: "CDF table".into() });
        }
        // reach: outside mass around 1e-8
        let (scale, reach) = match *spec {
            ProcessSpec::SaS { alpha, gamma } => ((gamma * t).powf(1.0 / alpha), 1e8f64.powf(1.0 / alpha).min(1e16)),
            ProcessSpec::Laplace { scale } => (scale, 40.0 + 4.0 * t),
            _ => unreachable!("symmetric families with pointwise densities"),
        };
        let h = reach.ln_1p() / TABLE_CELLS as f64;
        let x = |j: f64| scale * (j * h).exp_m1();
        let pdf = |x: f64| pointwise::pdf(spec, t, x);
        let mut values = Vec::with_capacity(TABLE_CELLS + 1);
        // the density may be unbounded at 0 (Laplace with t < 1/2)
        let first = integrate(|u| pdf(u).unwrap_or(f64::NAN), 0.0, x(1.0), QuadOptions::tolerances(1e-14, 1e-10));
        if !(first.converged && first.value.is_finite()) {
            return Err(Error::Numerical {
                context: "CDF table, first cell".into(),
                partial: first.value,
                abs_err: first.abs_err,
            });
        }
        let mut acc = first.value;
        let mut prev = pdf(x(1.0))?;
        values.extend([0.0, acc]);
        for j in 2..=TABLE_CELLS {
            let (a, b) = (x(j as f64 - 1.0), x(j as f64));
            let mid = pdf(0.5 * (a + b))?;
            let cur = pdf(b)?;
            acc += (b - a) / 6.0 * (prev + 4.0 * mid + cur);
            values.push(acc);
            prev = cur;
        }
        Ok(MarginalCdf::Table { scale, h, values })
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            MarginalCdf::Exact { spec, t } => pointwise::cdf(spec, *t, x).expect("checked at construction"),
            MarginalCdf::Table { scale, h, values } => {
                let a = (x.abs() / scale).ln_1p() / h;
                let last = values.len() - 1;
                let half_mass = if a >= last as f64 {
                    values[last]
                } else {
                    // linear in the table variable; cells are narrow enough
                    let j = a.floor() as usize;
                    let f = a - j as f64;
                    values[j] * (1.0 - f) + values[j + 1] * f
                };
                if x >= 0.0 {
                    0.5 + half_mass
                } else {
                    0.5 - half_mass
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p_value_reference_points() {
        // Kolmogorov distribution: P(K > 1.3581) = 0.05, P(K > 1.6276) = 0.01
        let n = 1_000_000;
        let scale = (n as f64).sqrt() + 0.12 + 0.11 / (n as f64).sqrt();
        assert!((ks_p_value(1.3581 / scale, n) - 0.05).abs() < 1e-4);
        assert!((ks_p_value(1.6276 / scale, n) - 0.01).abs() < 1e-4);
    }

    #[test]
    fn laplace_table_matches_unit_time_closed_form() {
        let spec = ProcessSpec::laplace(1.5).unwrap();
        let cdf = MarginalCdf::new(&spec, 1.0).unwrap();
        for x in [-7.0, -1.0, -0.1, 0.0, 0.3, 2.0, 12.0] {
            let exact: f64 = if x < 0.0 { 0.5 * (x / 1.5f64).exp() } else { 1.0 - 0.5 * (-x / 1.5f64).exp() };
            assert!((cdf.eval(x) - exact).abs() < 1e-6, "x={x}");
        }
    }
}
