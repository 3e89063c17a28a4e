//! Differential entropy of density grids, quantized laws and their discrete
//! entropies, the process entropy `H_{n,m}`, and gamma-process closed forms.
//!
//! All entropies are in nats.

mod marginal;
mod tails;

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::density::DensityGrid;
use crate::error::{Error, Result};
use crate::io::fmt_sig;
use crate::special::{digamma, ln_gamma, EULER_GAMMA};

pub use marginal::{marginal_entropy, process_entropy, quantized_law, renyi_gap, stable_entropy, ENTROPY_POINTS};

/// Largest tail mass [`differential_entropy`] accepts.
pub const MAX_TAIL_MASS: f64 = 1e-4;
/// Error bar above which an estimate is flagged.
pub const FLAG_ERROR: f64 = 1e-3;

/// How an entropy value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyMethod {
    /// Trapezoid rule on a Fourier-inverted grid.
    FftGrid,
    /// Trapezoid rule on a tabulated analytic pdf.
    ClosedFormGrid,
    /// Analytic formula.
    ClosedForm,
    /// Adaptive quadrature of a pointwise pdf with analytic tails.
    Quadrature,
    /// Fourier-inverted grid with the tails modelled by `t·w(x)`.
    FftWithTailModel,
    /// Bin probabilities from a closed-form CDF.
    CdfBins,
    /// Bin probabilities by quadrature of a pointwise pdf.
    PdfBins,
    /// Bin probabilities from a density grid.
    GridBins,
}

impl EntropyMethod {
    pub fn name(self) -> &'static str {
        match self {
            Self::FftGrid => "fft_grid",
            Self::ClosedFormGrid => "closed_form_grid",
            Self::ClosedForm => "closed_form",
            Self::Quadrature => "quadrature",
            Self::FftWithTailModel => "fft_with_tail_model",
            Self::CdfBins => "cdf_bins",
            Self::PdfBins => "pdf_bins",
            Self::GridBins => "grid_bins",
        }
    }
}

/// An entropy value with an error bar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    pub value: f64,
    pub err: f64,
    pub method: EntropyMethod,
    /// The estimate missed its own tolerance or rests on a flagged grid.
    pub flagged: bool,
}

/// The law of `[X]_m = ⌊mX⌋/m`: bin `k` is `[k/m, (k+1)/m)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantizedLaw {
    pub m: u32,
    /// Index of the bin holding `probs[0]`.
    pub offset_index: i64,
    pub probs: Vec<f64>,
    /// Probability of the bins not listed.
    pub tail_mass: f64,
    /// Estimated `-Σ p log p` over the bins not listed.
    #[serde(default)]
    pub tail_entropy: f64,
    pub method: EntropyMethod,
}

impl QuantizedLaw {
    /// A law given by its listed bins only.
    pub fn new(m: u32, offset_index: i64, probs: Vec<f64>) -> Self {
        let total = kahan_sum(probs.iter().copied());
        Self {
            m,
            offset_index,
            probs,
            tail_mass: (1.0 - total).max(0.0),
            tail_entropy: 0.0,
            method: EntropyMethod::GridBins,
        }
    }

    pub fn total(&self) -> f64 {
        kahan_sum(self.probs.iter().copied()) + self.tail_mass
    }
}

/// Compensated summation.
pub(crate) fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        comp += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
        sum = t;
    }
    sum + comp
}

pub(crate) fn neg_plogp(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.ln()
    } else {
        0.0
    }
}

/// `-∫ p log p` over a grid by the trapezoid rule (`0 log 0 = 0`).
///
/// Refuses grids whose tail mass is [`MAX_TAIL_MASS`] or more. The error bar
/// adds the step-halving difference, the clipped mass and the tail bound
/// `-tail·log(tail/width)`.
pub fn differential_entropy(grid: &DensityGrid) -> Result<EntropyEstimate> {
    if grid.len() < 3 {
        return Err(Error::Precondition("entropy needs at least three grid points".into()));
    }
    if grid.tail_mass >= MAX_TAIL_MASS {
        return Err(Error::ExcessiveTail { tail_mass: grid.tail_mass, limit: MAX_TAIL_MASS });
    }
    let (value, quad_err) = trapezoid_entropy(grid);
    let width = grid.x_end() - grid.x0;
    let err = quad_err + mass_bound(grid.tail_mass, width) + mass_bound(grid.diagnostics.clipped_mass, width);
    let method = match grid.method {
        crate::density::DensityMethod::FftInversion => EntropyMethod::FftGrid,
        crate::density::DensityMethod::ClosedForm => EntropyMethod::ClosedFormGrid,
    };
    Ok(EntropyEstimate { value, err, method, flagged: grid.diagnostics.flagged || err > FLAG_ERROR })
}

/// Trapezoid value of `-∫ p log p` and the step-halving error estimate.
pub(crate) fn trapezoid_entropy(grid: &DensityGrid) -> (f64, f64) {
    let f: Vec<f64> = grid.values.iter().map(|&p| neg_plogp(p)).collect();
    let n = f.len();
    let fine = grid.dx * (kahan_sum(f.iter().copied()) - 0.5 * (f[0] + f[n - 1]));
    // coarse rule on even indices, closing with the last point if n is even
    let last_even = (n - 1) & !1;
    let coarse = 2.0 * grid.dx * (kahan_sum(f.iter().step_by(2).copied()) - 0.5 * (f[0] + f[last_even]))
        + if last_even != n - 1 { 0.5 * grid.dx * (f[last_even] + f[n - 1]) } else { 0.0 };
    (fine, (fine - coarse).abs() / 3.0)
}

/// Entropy bound `-q log(q/width)` for mass `q` spread over `width`.
pub(crate) fn mass_bound(q: f64, width: f64) -> f64 {
    if q > 0.0 {
        (q * (q / width).ln()).abs()
    } else {
        0.0
    }
}

/// Bin probabilities `∫_{k/m}^{(k+1)/m} p` from a grid whose step divides
/// `1/m` and whose points include the bin edges.
///
/// Bins are integrated by the trapezoid rule with an end correction using
/// centred differences, so splitting a bin in two conserves its mass.
pub fn quantized_pmf(grid: &DensityGrid, m: u32) -> Result<QuantizedLaw> {
    if m == 0 {
        return Err(Error::Precondition("quantization order m must be at least 1".into()));
    }
    let w = 1.0 / m as f64;
    let ratio = w / grid.dx;
    if ratio < 1.0 - 1e-9 {
        return Err(Error::Precondition(format!(
            "bin width 1/{m} is finer than the grid step {}; refine the grid first",
            grid.dx
        )));
    }
    let r = ratio.round();
    if (ratio - r).abs() > 1e-6 * ratio {
        return Err(Error::Misaligned(format!("bin width 1/{m} is not a multiple of the grid step {}", grid.dx)));
    }
    let r = r as usize;
    let k0 = (grid.x0 * m as f64 - 1e-9).ceil() as i64;
    let j0f = (k0 as f64 * w - grid.x0) / grid.dx;
    let j0 = j0f.round();
    if (j0f - j0).abs() > 1e-6 {
        return Err(Error::Misaligned(format!(
            "bin edge {} falls between grid points (grid starts at {})",
            k0 as f64 * w,
            grid.x0
        )));
    }
    let j0 = j0 as usize;
    let n = grid.len();
    let v = &grid.values;
    let slope = |j: usize| -> f64 {
        if j == 0 {
            (v[1] - v[0]) / grid.dx
        } else if j == n - 1 {
            (v[n - 1] - v[n - 2]) / grid.dx
        } else {
            (v[j + 1] - v[j - 1]) / (2.0 * grid.dx)
        }
    };
    let mut probs = Vec::new();
    let mut a = j0;
    while a + r < n {
        let b = a + r;
        let trap = grid.dx * (kahan_sum(v[a..=b].iter().copied()) - 0.5 * (v[a] + v[b]));
        let corr = -grid.dx * grid.dx / 12.0 * (slope(b) - slope(a));
        probs.push((trap + corr).max(0.0));
        a = b;
    }
    let mut law = QuantizedLaw::new(m, k0, probs);
    law.tail_mass = (1.0 - kahan_sum(law.probs.iter().copied())).max(0.0);
    Ok(law)
}

/// `-Σ p log p` over the listed bins plus the law's tail estimate.
pub fn discrete_entropy(law: &QuantizedLaw) -> f64 {
    kahan_sum(law.probs.iter().map(|&p| neg_plogp(p))) + law.tail_entropy
}

/// Entropy of the Gamma(shape `τt`, scale `θ`) law:
/// `τt + log θ + log Γ(τt) + (1 - τt) ψ(τt)`.
pub fn gamma_entropy_closed_form(theta: f64, tau: f64, t: f64) -> f64 {
    let k = tau * t;
    k + theta.ln() + ln_gamma(k) + (1.0 - k) * digamma(k)
}

/// Small-time expansion `-1/(τt) - log t + log(θ/τ) - γ + 1`.
pub fn gamma_entropy_asymptotic(theta: f64, tau: f64, t: f64) -> f64 {
    -1.0 / (tau * t) - t.ln() + (theta / tau).ln() - EULER_GAMMA + 1.0
}

/// Abscissa of an entropy curve point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Abscissa {
    Time(f64),
    Quantization { n: u32, m: u32 },
}

impl Abscissa {
    fn key(&self) -> (f64, f64) {
        match *self {
            Self::Time(t) => (t, 0.0),
            Self::Quantization { n, m } => (n as f64, m as f64),
        }
    }
}

impl fmt::Display for Abscissa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::Time(t) => f.write_str(&fmt_sig(t)),
            Self::Quantization { n, m } => write!(f, "{n}x{m}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyPoint {
    pub abscissa: Abscissa,
    pub value: f64,
    pub err: f64,
    pub method: EntropyMethod,
}

/// Entropies of one process along a time or quantization grid, sorted by
/// abscissa.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyCurve {
    pub spec_id: String,
    pub points: Vec<EntropyPoint>,
}

impl EntropyCurve {
    pub fn new(spec_id: impl Into<String>, mut points: Vec<EntropyPoint>) -> Self {
        points.sort_by(|a, b| a.abscissa.key().partial_cmp(&b.abscissa.key()).unwrap_or(std::cmp::Ordering::Equal));
        Self { spec_id: spec_id.into(), points }
    }

    /// `h(L_t)` at each `t`.
    pub fn over_time(spec: &crate::ProcessSpec, t_grid: &[f64]) -> Result<Self> {
        let points = t_grid
            .iter()
            .map(|&t| {
                let e = marginal_entropy(spec, t)?;
                Ok(EntropyPoint { abscissa: Abscissa::Time(t), value: e.value, err: e.err, method: e.method })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(spec.id(), points))
    }

    /// Writes `abscissa,value,err,method` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "abscissa,value,err,method")?;
        for p in &self.points {
            writeln!(out, "{},{},{},{}", p.abscissa, fmt_sig(p.value), fmt_sig(p.err), p.method.name())?;
        }
        Ok(())
    }
}
