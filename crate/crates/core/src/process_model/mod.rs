//! Lévy process families, characteristic exponents, the sector condition and
//! Blumenthal–Getoor index estimation.

mod exponent;
mod spec;

pub use exponent::{CharExponentEval, EvalMethod, ExponentEvaluator};
pub use spec::{Family, ProcessSpec, RawSpec};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::least_squares;

#[allow(unused_imports)]
pub(crate) use spec::fnv1a;

/// Ψ(ξ) for a single frequency.
pub fn char_exponent(spec: &ProcessSpec, xi: f64) -> Result<CharExponentEval> {
    ExponentEvaluator::new(spec)?.eval(xi)
}

/// `Φ_{L_t}(ξ) = exp(tΨ(ξ))`.
pub fn char_function(spec: &ProcessSpec, t: f64, xi: f64) -> Result<Complex64> {
    ExponentEvaluator::new(spec)?.char_function(t, xi)
}

/// Outcome of [`check_sector`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorCheck {
    pub satisfied: bool,
    /// max |Im Ψ| / |Re Ψ| over the grid
    pub c_hat: f64,
    pub diagnostic: Option<String>,
}

/// Checks `|Im Ψ(ξ)| <= C |Re Ψ(ξ)|` on a grid of frequencies with `|ξ| >= 1`.
pub fn check_sector(spec: &ProcessSpec, xi_grid: &[f64]) -> Result<SectorCheck> {
    if xi_grid.is_empty() {
        return Err(Error::Precondition("sector check needs a nonempty frequency grid".into()));
    }
    if let Some(bad) = xi_grid.iter().find(|x| !(x.abs() >= 1.0) || !x.is_finite()) {
        return Err(Error::Precondition(format!("sector check is restricted to |xi| >= 1, got {bad}")));
    }
    let ev = ExponentEvaluator::new(spec)?;
    let mut c_hat: f64 = 0.0;
    for &xi in xi_grid {
        let e = ev.eval(xi)?;
        let (re, im) = (e.psi.re.abs(), e.psi.im.abs());
        // imaginary parts at quadrature noise level count as zero
        let im = if im <= e.abs_err { 0.0 } else { im };
        if re == 0.0 {
            if im == 0.0 {
                continue;
            }
            return Ok(SectorCheck {
                satisfied: false,
                c_hat: f64::INFINITY,
                diagnostic: Some(format!("Re Psi vanishes at xi = {xi} while Im Psi = {}", e.psi.im)),
            });
        }
        c_hat = c_hat.max(im / re);
    }
    Ok(SectorCheck { satisfied: c_hat.is_finite(), c_hat, diagnostic: None })
}

/// Least-squares estimate of the Blumenthal–Getoor index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BGIndexEstimate {
    pub beta_hat: f64,
    pub fit_range: [f64; 2],
    pub r_squared: f64,
    pub slope_stderr: f64,
    /// Unclamped power coefficient of the fit.
    pub raw_slope: f64,
    /// Coefficient of `log log ξ`, which absorbs logarithmic growth.
    pub log_log_coef: f64,
}

/// Default fit window and resolution.
pub const BG_FIT_RANGE: [f64; 2] = [1e3, 1e6];
pub const BG_FIT_POINTS: usize = 64;
/// Power coefficients below this are reported as zero.
pub const BG_ZERO_THRESHOLD: f64 = 0.02;

pub fn estimate_bg_index(spec: &ProcessSpec) -> Result<BGIndexEstimate> {
    estimate_bg_index_in(spec, BG_FIT_RANGE, BG_FIT_POINTS)
}

/// Fits `log|Ψ(ξ)| ≈ a + β log ξ + c log log ξ` on a geometric grid.
///
/// The `log log` column keeps slowly varying exponents such as `τ log ξ`
/// from leaking into the power coefficient.
pub fn estimate_bg_index_in(spec: &ProcessSpec, range: [f64; 2], points: usize) -> Result<BGIndexEstimate> {
    if !(range[0] > 1.0 && range[1] > range[0] && points >= 4) {
        return Err(Error::Precondition(format!(
            "BG fit needs 1 < xi_min < xi_max and at least 4 points, got {range:?} / {points}"
        )));
    }
    let ev = ExponentEvaluator::new(spec)?;
    let (l0, l1) = (range[0].ln(), range[1].ln());
    let mut lx = Vec::with_capacity(points);
    let mut llx = Vec::with_capacity(points);
    let mut ly = Vec::with_capacity(points);
    for i in 0..points {
        let l = l0 + (l1 - l0) * i as f64 / (points - 1) as f64;
        let psi = ev.psi(l.exp())?;
        lx.push(l);
        llx.push(l.ln());
        ly.push(psi.norm().ln());
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (m1, m2) = (mean(&lx), mean(&llx));
    let rows: Vec<Vec<f64>> = lx.iter().zip(&llx).map(|(a, b)| vec![1.0, a - m1, b - m2]).collect();
    let fit = least_squares(&rows, &ly);
    let raw = fit.coef[1];
    let stderr = fit.stderr[1];
    let beta_hat = if raw < BG_ZERO_THRESHOLD.max(3.0 * stderr) { 0.0 } else { raw.min(2.0) };
    Ok(BGIndexEstimate {
        beta_hat,
        fit_range: range,
        r_squared: fit.r_squared,
        slope_stderr: stderr,
        raw_slope: raw,
        log_log_coef: fit.coef[2],
    })
}

/// The index implied by the family parameters (no fitting).
pub fn nominal_bg_index(spec: &ProcessSpec) -> f64 {
    match *spec {
        ProcessSpec::Wiener { .. } => 2.0,
        ProcessSpec::SaS { alpha, .. } => alpha,
        ProcessSpec::Gamma { .. } | ProcessSpec::Laplace { .. } => 0.0,
        ProcessSpec::LayeredStable { alpha0, .. } => alpha0,
        ProcessSpec::TemperedStable { alpha, .. } => alpha,
    }
}

/// `γ` of the symmetric stable law obtained as the small-time limit of
/// `t^{-1/β} L_t`, where it exists in closed form.
///
/// For the jump-kernel families this is `-2 a κ(α)` with `κ` the stable
/// constant of [`crate::special::stable_constant`], i.e. `a ∫ (1 - cos u) |u|^{-α-1} du`.
pub fn stable_limit_gamma(spec: &ProcessSpec) -> Option<f64> {
    use crate::special::stable_constant;
    match *spec {
        ProcessSpec::Wiener { sigma2, .. } => Some(0.5 * sigma2),
        ProcessSpec::SaS { gamma, .. } => Some(gamma),
        ProcessSpec::LayeredStable { alpha0, a0, .. } => Some(-2.0 * a0 * stable_constant(alpha0)),
        ProcessSpec::TemperedStable { alpha, c, .. } => Some(-2.0 * c * stable_constant(alpha)),
        ProcessSpec::Gamma { .. } | ProcessSpec::Laplace { .. } => None,
    }
}

/// Frequency `ξ_e > 0` with `t |Re Ψ(ξ_e)| = 1`; `1/ξ_e` is the natural
/// length scale of `L_t`.
pub fn unit_frequency(ev: &ExponentEvaluator, t: f64) -> Result<f64> {
    let f = |l: f64| -> Result<f64> { Ok(t * ev.psi(l.exp())?.re.abs()) };
    let (mut lo, mut hi) = (-300.0f64, 300.0f64);
    if f(hi)? < 1.0 {
        return Err(Error::Numerical {
            context: format!("characteristic exponent stays below 1/t = {} up to xi = e^300", 1.0 / t),
            partial: f64::NAN,
            abs_err: f64::INFINITY,
        });
    }
    if f(lo)? >= 1.0 {
        return Ok(lo.exp());
    }
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}
