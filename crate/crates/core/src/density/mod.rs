//! Marginal densities of `L_t`: Fourier inversion of `Φ_{L_t}`, analytic
//! densities, and rescaled densities for local-limit comparisons.

pub mod fft;
pub mod pointwise;

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::fmt_sig;
use crate::process_model::{stable_limit_gamma, ExponentEvaluator, ProcessSpec};
use crate::special::gamma_q;

pub use pointwise::{has_pointwise_pdf, levy_density, pdf, stable_pdf};

/// Default grid size.
pub const DEFAULT_POINTS: usize = 1 << 16;
/// Largest clipped mass accepted without flagging the grid.
pub const CLIP_LIMIT: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityMethod {
    FftInversion,
    ClosedForm,
}

/// How a grid was produced and how much to trust it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GridDiagnostics {
    /// Frequency cutoff targeted by the inversion.
    pub cutoff: Option<f64>,
    /// `|Φ|` at the highest frequency represented on the grid.
    pub truncation_decay: Option<f64>,
    pub clipped_mass: f64,
    pub oversample: usize,
    /// Set when clipping or spectral truncation exceeded their limits.
    pub flagged: bool,
}

/// A pdf sampled at `x0 + j·dx`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    pub x0: f64,
    pub dx: f64,
    pub values: Vec<f64>,
    /// Probability outside the grid, `max(0, 1 - dx·Σ values)`.
    pub tail_mass: f64,
    pub method: DensityMethod,
    pub diagnostics: GridDiagnostics,
}

impl DensityGrid {
    /// Builds a grid from samples, with `tail_mass = max(0, 1 - dx·Σ values)`.
    pub fn from_samples(x0: f64, dx: f64, values: Vec<f64>, method: DensityMethod) -> Self {
        let mass = dx * values.iter().sum::<f64>();
        Self { x0, dx, values, tail_mass: (1.0 - mass).max(0.0), method, diagnostics: GridDiagnostics::default() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x0 + j as f64 * self.dx
    }

    /// Last grid abscissa.
    pub fn x_end(&self) -> f64 {
        self.x(self.len().saturating_sub(1))
    }

    /// `dx·Σ values`.
    pub fn mass(&self) -> f64 {
        self.dx * self.values.iter().sum::<f64>()
    }

    /// The grid of `a·X` for `a > 0`.
    pub fn scaled(&self, a: f64) -> Self {
        Self { x0: a * self.x0, dx: a * self.dx, values: self.values.iter().map(|v| v / a).collect(), ..self.clone() }
    }

    /// Linear interpolation, zero outside the grid.
    pub fn value_at(&self, x: f64) -> f64 {
        let u = (x - self.x0) / self.dx;
        if u < 0.0 || u > (self.len() - 1) as f64 {
            return 0.0;
        }
        let j = (u.floor() as usize).min(self.len() - 2);
        let w = u - j as f64;
        self.values[j] * (1.0 - w) + self.values[j + 1] * w
    }

    /// Writes `x,pdf` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "x,pdf")?;
        for (j, v) in self.values.iter().enumerate() {
            writeln!(out, "{},{}", fmt_sig(self.x(j)), fmt_sig(*v))?;
        }
        Ok(())
    }
}

fn check_inputs(spec: &ProcessSpec, t: f64, n_points: usize) -> Result<()> {
    spec.validate()?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Precondition(format!("time must be positive and finite, got {t}")));
    }
    if !n_points.is_power_of_two() || n_points < 16 {
        return Err(Error::Precondition(format!("n_points must be a power of two >= 16, got {n_points}")));
    }
    Ok(())
}

fn check_range(range: (f64, f64)) -> Result<()> {
    if !(range.0.is_finite() && range.1.is_finite() && range.1 > range.0) {
        return Err(Error::Precondition(format!("invalid x range {range:?}")));
    }
    Ok(())
}

/// Window `[lo, hi]` holding all but ~1e-13 of the mass, where such a window
/// is cheap to state; `None` for heavy-tailed laws.
fn light_tail_window(spec: &ProcessSpec, t: f64) -> Option<(f64, f64)> {
    match *spec {
        ProcessSpec::Wiener { sigma2, mu } => {
            let h = 12.0 * (sigma2 * t).sqrt();
            Some((mu * t - h, mu * t + h))
        }
        ProcessSpec::SaS { alpha, gamma } if alpha == 2.0 => {
            let h = 12.0 * (2.0 * gamma * t).sqrt();
            Some((-h, h))
        }
        ProcessSpec::Gamma { theta, tau } => {
            let shape = tau * t;
            let mut b = (shape + 10.0 * shape.sqrt() + 10.0) * theta;
            while gamma_q(shape, b / theta) > 1e-14 {
                b *= 1.5;
            }
            Some((-b / 16.0, b))
        }
        ProcessSpec::Laplace { scale } => {
            let mut b = (t + 10.0 * t.sqrt() + 10.0) * scale;
            while 2.0 * gamma_q(t, b / scale) > 1e-14 {
                b *= 1.5;
            }
            Some((-b, b))
        }
        _ => None,
    }
}

/// Fourier inversion for the law of `(L_t - center) / scale` on a grid.
pub(crate) struct InversionPlan {
    pub center: f64,
    pub scale: f64,
    pub x0: f64,
    pub dx: f64,
    pub n: usize,
}

pub(crate) fn invert_on(ev: &ExponentEvaluator, t: f64, plan: &InversionPlan, cutoff: f64) -> Result<DensityGrid> {
    let (c, s) = (plan.center, plan.scale);
    let phi = |eta: f64| -> Result<Complex64> {
        let xi = eta / s;
        Ok((ev.psi(xi)? * t - Complex64::new(0.0, xi * c)).exp())
    };
    let spec = *ev.spec();
    let tail = move |y: f64| pointwise::levy_density(&spec, c + s * y).map_or(0.0, |w| s * t * w);
    let has_tail = pointwise::levy_density(&spec, 1.0).is_some();
    let inv =
        fft::invert(phi, plan.x0, plan.dx, plan.n, cutoff, has_tail.then_some(&tail as &(dyn Fn(f64) -> f64 + Sync)))?;
    let truncation = (t * ev.psi(inv.effective_cutoff / s)?.re).exp();
    let mut grid = DensityGrid::from_samples(plan.x0, plan.dx, inv.values, DensityMethod::FftInversion);
    grid.diagnostics = GridDiagnostics {
        cutoff: Some(cutoff),
        truncation_decay: Some(truncation),
        clipped_mass: inv.clipped_mass,
        oversample: inv.oversample,
        flagged: inv.clipped_mass > CLIP_LIMIT || truncation > fft::DECAY_CHECK,
    };
    Ok(grid)
}

/// Cutoff in the units of `L_t / scale`.
pub(crate) fn scaled_cutoff(ev: &ExponentEvaluator, t: f64, scale: f64) -> Result<fft::Cutoff> {
    fft::find_cutoff(|eta| Ok(t * ev.psi(eta / scale)?.re), t, fft::MAX_CUTOFF * scale.max(1.0))
}

/// pdf of `L_t` by discrete Fourier inversion.
///
/// With no `x_range`, light-tailed laws get a window holding all but ~1e-13
/// of the mass, and heavy-tailed laws a window of `n_points` Nyquist steps
/// `π/Ξ` around the origin. Fails with [`Error::NonIntegrable`] when
/// `|Φ_{L_t}|` is still above `1e-8` at the frequency cap.
pub fn density_grid(spec: &ProcessSpec, t: f64, n_points: usize, x_range: Option<(f64, f64)>) -> Result<DensityGrid> {
    check_inputs(spec, t, n_points)?;
    let ev = ExponentEvaluator::new(spec)?;
    let cut = scaled_cutoff(&ev, t, 1.0)?;
    let nyquist = PI / cut.xi;
    let (x0, dx) = match x_range.or_else(|| light_tail_window(spec, t)) {
        Some(range) => {
            check_range(range)?;
            (range.0, (range.1 - range.0) / (n_points - 1) as f64)
        }
        None => (-(n_points as f64 / 2.0) * nyquist, nyquist),
    };
    let plan = InversionPlan { center: 0.0, scale: 1.0, x0, dx, n: n_points };
    invert_on(&ev, t, &plan, cut.xi)
}

/// pdf of `L_t / scale`, centred on the origin, with step `π/Ξ` unless a
/// window is given. Used by the entropy routes.
pub fn scaled_density_grid(
    spec: &ProcessSpec,
    t: f64,
    scale: f64,
    n_points: usize,
    x_range: Option<(f64, f64)>,
) -> Result<DensityGrid> {
    check_inputs(spec, t, n_points)?;
    let ev = ExponentEvaluator::new(spec)?;
    let cut = scaled_cutoff(&ev, t, scale)?;
    let nyquist = PI / cut.xi;
    let (x0, dx) = match x_range {
        Some(range) => {
            check_range(range)?;
            (range.0, (range.1 - range.0) / (n_points - 1) as f64)
        }
        None => (-(n_points as f64 / 2.0) * nyquist, nyquist),
    };
    let plan = InversionPlan { center: 0.0, scale, x0, dx, n: n_points };
    invert_on(&ev, t, &plan, cut.xi)
}

/// pdf of `L_t` by Fourier inversion at exactly `x0 + j·dx`, `j < n`.
///
/// Used when the abscissae must line up with something else, such as
/// quantization bin edges.
pub fn density_on_lattice(spec: &ProcessSpec, t: f64, x0: f64, dx: f64, n: usize) -> Result<DensityGrid> {
    spec.validate()?;
    if !(t > 0.0 && t.is_finite() && dx > 0.0 && x0.is_finite() && n >= 2) {
        return Err(Error::Precondition(format!("invalid lattice t={t}, x0={x0}, dx={dx}, n={n}")));
    }
    let ev = ExponentEvaluator::new(spec)?;
    let cut = scaled_cutoff(&ev, t, 1.0)?;
    let plan = InversionPlan { center: 0.0, scale: 1.0, x0, dx, n };
    invert_on(&ev, t, &plan, cut.xi)
}

/// Tabulates an analytic pdf: Wiener, Gamma, and SaS with α ∈ {1, 2}.
///
/// Gamma grids start at `dx/2` (the density is unbounded at 0 when `τt < 1`).
pub fn closed_form_density(
    spec: &ProcessSpec,
    t: f64,
    n_points: usize,
    x_range: Option<(f64, f64)>,
) -> Result<DensityGrid> {
    check_inputs(spec, t, n_points)?;
    let supported = match *spec {
        ProcessSpec::Wiener { .. } | ProcessSpec::Gamma { .. } => true,
        ProcessSpec::SaS { alpha, .. } => alpha == 1.0 || alpha == 2.0,
        _ => false,
    };
    if !supported {
        return Err(Error::Unsupported {
            family: spec.family().to_string(),
            operation: "closed-form density (available for Wiener, Gamma, SaS with alpha in {1, 2})".into(),
        });
    }
    let range = match x_range {
        Some(r) => {
            check_range(r)?;
            r
        }
        None => match *spec {
            ProcessSpec::Gamma { .. } => {
                let (_, hi) = light_tail_window(spec, t).expect("gamma window");
                (0.0, hi)
            }
            ProcessSpec::SaS { alpha, gamma } if alpha == 1.0 => {
                let h = n_points as f64 / 64.0 * gamma * t;
                (-h, h)
            }
            _ => light_tail_window(spec, t).expect("light-tailed family"),
        },
    };
    let (x0, dx) = match *spec {
        ProcessSpec::Gamma { .. } => {
            let lo = range.0.max(0.0);
            let dx = (range.1 - lo) / n_points as f64;
            (lo + 0.5 * dx, dx)
        }
        _ => (range.0, (range.1 - range.0) / (n_points - 1) as f64),
    };
    let values = (0..n_points).map(|j| pdf(spec, t, x0 + j as f64 * dx)).collect::<Result<Vec<_>>>()?;
    Ok(DensityGrid::from_samples(x0, dx, values, DensityMethod::ClosedForm))
}

/// Half-width of the fixed window used for rescaled densities: 25 limit
/// scale units.
pub fn rescaled_half_width(spec: &ProcessSpec, beta: f64) -> Result<f64> {
    let g = stable_limit_gamma(spec)
        .ok_or_else(|| Error::Precondition(format!("{} has no non-degenerate small-time limit", spec.family())))?;
    Ok(25.0 * g.powf(1.0 / beta))
}

/// pdf of `t^{-1/β} L_t` on a window fixed by the small-time limit law, so
/// grids for different `t` share abscissae.
pub fn rescaled_density(spec: &ProcessSpec, t: f64, beta: f64, n_points: usize) -> Result<DensityGrid> {
    if !(beta > 0.0 && beta <= 2.0) {
        return Err(Error::Precondition(format!(
            "rescaling index must lie in (0, 2], got {beta}; index-zero processes converge to 0"
        )));
    }
    check_inputs(spec, t, n_points)?;
    let h = rescaled_half_width(spec, beta)?;
    let ev = ExponentEvaluator::new(spec)?;
    let scale = t.powf(1.0 / beta);
    let cut = scaled_cutoff(&ev, t, scale)?;
    let plan = InversionPlan { center: 0.0, scale, x0: -h, dx: 2.0 * h / (n_points - 1) as f64, n: n_points };
    invert_on(&ev, t, &plan, cut.xi)
}

/// pdf of the SaS(α, γ) law at `t = 1`, on the same window as
/// [`rescaled_density`] for any process whose limit is this law.
pub fn stable_reference_density(alpha: f64, gamma: f64, n_points: usize) -> Result<DensityGrid> {
    let spec = ProcessSpec::sas(alpha, gamma)?;
    rescaled_density(&spec, 1.0, alpha, n_points)
}

/// Largest absolute difference between two grids on identical abscissae.
pub fn sup_distance(a: &DensityGrid, b: &DensityGrid) -> Result<f64> {
    if a.len() != b.len() || (a.x0 - b.x0).abs() > 1e-12 * a.dx || (a.dx - b.dx).abs() > 1e-12 * a.dx {
        return Err(Error::Misaligned("sup distance needs grids with identical abscissae".into()));
    }
    Ok(a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}
