//! Entropy routes for the marginals `L_t`, chosen per family.
//!
//! Differential entropy: Fourier-inverted grids for Gaussian laws and
//! bounded gamma densities, pointwise-pdf quadrature for stable and Laplace
//! marginals, and rescaled grids plus a `t·w(x)` tail model for the
//! jump-kernel families. Quantized laws use closed-form CDFs where they
//! exist, pdf quadrature per bin otherwise, and aligned Fourier grids for the
//! jump-kernel families.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::density::{
    closed_form_density, density_grid, density_on_lattice, pointwise, scaled_density_grid, DensityGrid, DEFAULT_POINTS,
};
use crate::error::{Error, Result};
use crate::process_model::{unit_frequency, ExponentEvaluator, ProcessSpec};
use crate::quadrature::{ChebyshevPanels, QuadOptions};
use crate::special::{gamma, gamma_q, ln_gamma};

use super::tails::{levy_tail, numeric_tail, power_tail, Tail};
use super::{
    differential_entropy, discrete_entropy, gamma_entropy_closed_form, kahan_sum, mass_bound, neg_plogp, quantized_pmf,
    trapezoid_entropy, EntropyEstimate, EntropyMethod, QuantizedLaw, FLAG_ERROR,
};
use crate::quadrature::integrate_fallible;

/// Grid size for entropy computations on Fourier grids.
pub const ENTROPY_POINTS: usize = 1 << 15;
/// Gamma marginals with shape `τt` at least this take the density path.
pub const GAMMA_DENSITY_SHAPE: f64 = 1.2;
/// Most bins a quantized law may list.
const MAX_BINS: usize = 1 << 24;
/// Smallest abscissa reached by the log-scale quadratures; below it an
/// analytic model of the density is used.
const EPS_X: f64 = 1e-280;

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Precondition(format!("time must be positive and finite, got {t}")))
    }
}

/// `h(L_t)` in nats by the best available route for the family.
pub fn marginal_entropy(spec: &ProcessSpec, t: f64) -> Result<EntropyEstimate> {
    spec.validate()?;
    check_time(t)?;
    match *spec {
        ProcessSpec::Wiener { .. } => differential_entropy(&density_grid(spec, t, ENTROPY_POINTS, None)?),
        ProcessSpec::SaS { alpha, .. } if alpha == 2.0 => {
            differential_entropy(&density_grid(spec, t, ENTROPY_POINTS, None)?)
        }
        ProcessSpec::SaS { alpha, gamma } => stable_entropy(alpha, gamma * t),
        ProcessSpec::Gamma { theta, tau } => {
            if tau * t >= GAMMA_DENSITY_SHAPE {
                gamma_density_entropy(spec, t)
            } else {
                Ok(EntropyEstimate {
                    value: gamma_entropy_closed_form(theta, tau, t),
                    err: 1e-12 * (1.0 / (tau * t)).max(1.0),
                    method: EntropyMethod::ClosedForm,
                    flagged: false,
                })
            }
        }
        ProcessSpec::Laplace { scale } => laplace_entropy(t, scale),
        ProcessSpec::LayeredStable { .. } | ProcessSpec::TemperedStable { .. } => tail_model_entropy(spec, t),
    }
}

/// Gamma density path: the Fourier grid where it is clean, otherwise the
/// tabulated pdf (midpoint samples, so the midpoint rule applies).
fn gamma_density_entropy(spec: &ProcessSpec, t: f64) -> Result<EntropyEstimate> {
    let fft = density_grid(spec, t, DEFAULT_POINTS, None)?;
    if !fft.diagnostics.flagged {
        return differential_entropy(&fft);
    }
    let grid = closed_form_density(spec, t, DEFAULT_POINTS, None)?;
    let f: Vec<f64> = grid.values.iter().map(|&p| neg_plogp(p)).collect();
    let midpoint = grid.dx * kahan_sum(f.iter().copied());
    let (trap, _) = trapezoid_entropy(&grid);
    let width = grid.x_end() - grid.x0;
    let err = (midpoint - trap).abs() + mass_bound(grid.tail_mass, width);
    Ok(EntropyEstimate { value: midpoint, err, method: EntropyMethod::ClosedFormGrid, flagged: err > FLAG_ERROR })
}

/// Entropy of the symmetric stable law with `Φ(ξ) = exp(-γ|ξ|^α)`.
///
/// With `σ = γ^{1/α}`, `h = h(S_α) + log σ`; `h(S_α)` is closed form for
/// `α ∈ {1, 2}` and otherwise integrated on log-spaced panels out to
/// `2^40`, past which the density is replaced by its leading tail term.
pub fn stable_entropy(alpha: f64, gamma_scale: f64) -> Result<EntropyEstimate> {
    if !(alpha > 0.0 && alpha <= 2.0) || !(gamma_scale > 0.0) {
        return Err(Error::Precondition(format!(
            "stable entropy needs alpha in (0, 2] and gamma > 0, got {alpha}, {gamma_scale}"
        )));
    }
    let ln_sigma = gamma_scale.ln() / alpha;
    if alpha == 2.0 {
        return Ok(closed(0.5 * (4.0 * PI * std::f64::consts::E).ln() + ln_sigma));
    }
    if alpha == 1.0 {
        return Ok(closed((4.0 * PI).ln() + ln_sigma));
    }
    let head_x = 2f64.powi(-20);
    let far = 2f64.powi(40);
    let p0 = pointwise::stable_pdf(alpha, 0.0)?;
    let head = Tail { entropy: neg_plogp(p0) * head_x, mass: p0 * head_x };
    let pts: Vec<f64> = ((head_x.ln().floor() as i64)..=(far.ln().ceil() as i64))
        .map(|v| (v as f64).clamp(head_x.ln(), far.ln()))
        .collect();
    let (body, quad_err) = log_scale_integral(|x| pointwise::stable_pdf(alpha, x), &pts, "stable entropy")?;
    let c = gamma(alpha + 1.0) * (0.5 * PI * alpha).sin() / PI;
    let tail = power_tail(c, alpha + 1.0, far, 1.0);
    let half = head + body + tail;
    // next tail term is smaller by a factor ~ x^{-α}
    let err = 2.0 * (quad_err + tail.entropy.abs() * far.powf(-alpha)) + (2.0 * half.mass - 1.0).abs();
    Ok(EntropyEstimate {
        value: 2.0 * half.entropy + ln_sigma,
        err,
        method: EntropyMethod::Quadrature,
        flagged: err > FLAG_ERROR,
    })
}

fn closed(value: f64) -> EntropyEstimate {
    EntropyEstimate { value, err: 1e-14 * value.abs().max(1.0), method: EntropyMethod::ClosedForm, flagged: false }
}

/// `(-∫ p log p, ∫ p)` over `[e^{v_0}, e^{v_last}]` in the variable
/// `v = log x`, with panel edges at the given `v`.
fn log_scale_integral(pdf: impl Fn(f64) -> Result<f64>, v_pts: &[f64], context: &str) -> Result<(Tail, f64)> {
    let (z, err) = integrate_fallible(
        |v: f64| {
            let x = v.exp();
            let p = pdf(x)?;
            Ok(Complex64::new(neg_plogp(p) * x, p * x))
        },
        v_pts,
        QuadOptions::tolerances(1e-300, 1e-11),
        context,
    )?;
    Ok((Tail { entropy: z.re, mass: z.im }, err))
}

/// Small-`x` model `p(x) ≈ C x^b` of the standard variance-gamma density
/// when `t < 1/2`.
fn variance_gamma_head(t: f64) -> (f64, f64) {
    let b = 2.0 * t - 1.0;
    let ln_c = ln_gamma(0.5 - t) - (2.0 * PI.sqrt()).ln() - ln_gamma(t) + (1.0 - 2.0 * t) * std::f64::consts::LN_2;
    (ln_c.exp(), b)
}

/// `(-∫ C x^b log(C x^b), ∫ C x^b)` over `[0, ε]`, `b > -1`.
fn power_head(c: f64, b: f64, eps: f64) -> Tail {
    let mass = c * eps.powf(b + 1.0) / (b + 1.0);
    Tail { entropy: -mass * (c.ln() + b * eps.ln() - b / (b + 1.0)), mass }
}

/// Point where the standard variance-gamma tail beyond is below `1e-18`.
fn variance_gamma_reach(t: f64) -> f64 {
    let mut x = t + 10.0 * t.sqrt() + 10.0;
    while gamma_q(t, x) > 1e-18 {
        x *= 1.5;
    }
    x
}

fn laplace_entropy(t: f64, scale: f64) -> Result<EntropyEstimate> {
    let head = if t < 0.5 {
        let (c, b) = variance_gamma_head(t);
        power_head(c, b, EPS_X)
    } else {
        Tail::default()
    };
    let reach = variance_gamma_reach(t);
    let pts = log_panels(EPS_X, reach, 2.0);
    let (body, quad_err) = log_scale_integral(|x| pointwise::variance_gamma_pdf(t, x), &pts, "Laplace entropy")?;
    let half = head + body;
    let err = 2.0 * quad_err + (2.0 * half.mass - 1.0).abs();
    Ok(EntropyEstimate {
        value: 2.0 * half.entropy + scale.ln(),
        err,
        method: EntropyMethod::Quadrature,
        flagged: err > FLAG_ERROR,
    })
}

/// Panel edges in `v = log x` from `a` to `b`, at most `width` apart.
fn log_panels(a: f64, b: f64, width: f64) -> Vec<f64> {
    let (va, vb) = (a.ln(), b.ln());
    let n = ((vb - va) / width).ceil().max(1.0) as usize;
    (0..=n).map(|i| va + (vb - va) * i as f64 / n as f64).collect()
}

/// Rescaled Fourier grid for `L_t / s` with `s` the inverse unit
/// frequency; the probability beyond the grid follows `t·w(x)`.
fn tail_model_entropy(spec: &ProcessSpec, t: f64) -> Result<EntropyEstimate> {
    let ev = ExponentEvaluator::new(spec)?;
    let s = 1.0 / unit_frequency(&ev, t)?;
    let grid = scaled_density_grid(spec, t, s, ENTROPY_POINTS, None)?;
    let (h_grid, quad_err) = trapezoid_entropy(&grid);
    let right = levy_tail(spec, t, grid.x_end() * s, 1.0)?;
    let left = levy_tail(spec, t, -grid.x0 * s, 1.0)?;
    let tails = right + left;
    // a density q in x has entropy part ∫ -q log(s q) in units of s
    let h_scaled = h_grid + tails.entropy - s.ln() * tails.mass;
    let model_gap = (grid.tail_mass - tails.mass).abs();
    let edge = levy_density_at(spec, t, grid.x_end() * s);
    let err = quad_err
        + model_gap * (edge.ln().abs() + 1.0)
        + mass_bound(grid.diagnostics.clipped_mass, grid.x_end() - grid.x0);
    Ok(EntropyEstimate {
        value: h_scaled + s.ln(),
        err,
        method: EntropyMethod::FftWithTailModel,
        flagged: grid.diagnostics.flagged || err > FLAG_ERROR,
    })
}

fn levy_density_at(spec: &ProcessSpec, t: f64, x: f64) -> f64 {
    pointwise::levy_density(spec, x).map_or(1.0, |w| (t * w).max(f64::MIN_POSITIVE))
}

/// The law of `[L_t]_m`.
pub fn quantized_law(spec: &ProcessSpec, t: f64, m: u32) -> Result<QuantizedLaw> {
    spec.validate()?;
    check_time(t)?;
    if m == 0 {
        return Err(Error::Precondition("quantization order m must be at least 1".into()));
    }
    match *spec {
        ProcessSpec::Wiener { .. } | ProcessSpec::Gamma { .. } => cdf_bins(spec, t, m),
        ProcessSpec::SaS { alpha, .. } if alpha == 1.0 || alpha == 2.0 => cdf_bins(spec, t, m),
        ProcessSpec::SaS { .. } | ProcessSpec::Laplace { .. } => pdf_bins(spec, t, m),
        ProcessSpec::LayeredStable { .. } | ProcessSpec::TemperedStable { .. } => grid_bins(spec, t, m),
    }
}

fn bin_count(k_lo: i64, k_hi: i64) -> Result<usize> {
    let n = (k_hi - k_lo).max(1) as usize;
    if n > MAX_BINS {
        return Err(Error::Precondition(format!("quantization would need {n} bins (limit {MAX_BINS}); lower m")));
    }
    Ok(n)
}

fn cdf_bins(spec: &ProcessSpec, t: f64, m: u32) -> Result<QuantizedLaw> {
    let mf = m as f64;
    let mut heavy = None;
    let (lo, hi) = match *spec {
        ProcessSpec::Wiener { sigma2, mu } => {
            let h = 13.0 * (sigma2 * t).sqrt();
            (mu * t - h, mu * t + h)
        }
        ProcessSpec::SaS { alpha, gamma } if alpha == 2.0 => {
            let h = 13.0 * (2.0 * gamma * t).sqrt();
            (-h, h)
        }
        ProcessSpec::SaS { gamma, .. } => {
            let g = gamma * t;
            heavy = Some(g);
            let r = (256.0 * g).max(256.0 / mf);
            (-r, r)
        }
        ProcessSpec::Gamma { theta, tau } => {
            let mut b = (tau * t + 10.0) * theta;
            while gamma_q(tau * t, b / theta) > 1e-20 {
                b *= 1.5;
            }
            (0.0, b)
        }
        _ => unreachable!("cdf_bins is only routed closed-form CDF families"),
    };
    let k_lo = (lo * mf).floor() as i64;
    let k_hi = (hi * mf).ceil() as i64;
    let n = bin_count(k_lo, k_hi)?;
    let probs: Vec<f64> = (0..n)
        .map(|i| {
            let k = k_lo + i as i64;
            pointwise::interval_probability(spec, t, k as f64 / mf, (k + 1) as f64 / mf)
                .expect("closed-form CDF")
                .max(0.0)
        })
        .collect();
    let mut law = QuantizedLaw::new(m, k_lo, probs);
    law.method = EntropyMethod::CdfBins;
    if let Some(g) = heavy {
        let cauchy = |x: f64| Ok(g / (PI * (g * g + x * x)));
        let right = numeric_tail(cauchy, k_hi as f64 / mf, mf, Some((g / PI, 2.0)))?;
        let left = numeric_tail(cauchy, -(k_lo as f64) / mf, mf, Some((g / PI, 2.0)))?;
        law.tail_entropy = right.entropy + left.entropy;
        law.tail_mass = right.mass + left.mass;
    }
    Ok(law)
}

/// Bins of a symmetric law from its pointwise pdf; the law is mirrored.
fn pdf_bins(spec: &ProcessSpec, t: f64, m: u32) -> Result<QuantizedLaw> {
    let mf = m as f64;
    let w = 1.0 / mf;
    // `width` is the length scale of the bulk; panels double up to it and
    // then grow by 1/4 (power tails) or stay at half of it (Laplace)
    let (reach, heavy, width, power_tail) = match *spec {
        ProcessSpec::SaS { alpha, gamma: g } => {
            let sigma = (g * t).powf(1.0 / alpha);
            ((64.0 * sigma).max(64.0 / mf), Some(alpha), sigma, true)
        }
        ProcessSpec::Laplace { scale } => (scale * variance_gamma_reach(t), None, scale, false),
        _ => unreachable!("pdf_bins is only routed SaS and Laplace"),
    };
    let k_max = (reach * mf).ceil() as i64;
    bin_count(-k_max, k_max)?;
    let pdf = |x: f64| pointwise::pdf(spec, t, x);
    let end = k_max as f64 * w;
    let mut edges = vec![w];
    while *edges.last().expect("nonempty") < end {
        let a = *edges.last().expect("nonempty");
        let step = if a < width {
            a
        } else if power_tail {
            0.25 * a
        } else {
            0.5 * width
        };
        edges.push((a + step).min(end));
    }
    let panels = if k_max > 1 { Some(ChebyshevPanels::new(pdf, &edges, 1e-300, 1e-13)?) } else { None };
    let mut half = Vec::with_capacity(k_max as usize);
    for k in 0..k_max {
        let p = match &panels {
            _ if k == 0 => mass_from_zero(spec, t, w)?,
            Some(panels) => panels.integral(k as f64 * w, (k + 1) as f64 * w),
            None => unreachable!("panels exist when k_max > 1"),
        };
        half.push(p.max(0.0));
    }
    let mut probs: Vec<f64> = half.iter().rev().copied().collect();
    probs.extend_from_slice(&half);
    let mut law = QuantizedLaw::new(m, -k_max, probs);
    law.method = EntropyMethod::PdfBins;
    if let Some(alpha) = heavy {
        let g = match *spec {
            ProcessSpec::SaS { gamma, .. } => gamma * t,
            _ => unreachable!(),
        };
        let c = g * gamma(alpha + 1.0) * (0.5 * PI * alpha).sin() / PI;
        let tail = numeric_tail(pdf, k_max as f64 * w, mf, Some((c, alpha + 1.0)))?;
        law.tail_entropy = 2.0 * tail.entropy;
        law.tail_mass = 2.0 * tail.mass;
    }
    Ok(law)
}

/// `P(0 < L_t < b)` for the symmetric pointwise families.
fn mass_from_zero(spec: &ProcessSpec, t: f64, b: f64) -> Result<f64> {
    match *spec {
        ProcessSpec::Laplace { scale } => {
            // log-scale panels absorb the |x|^{2t-1} singularity
            let head = if t < 0.5 {
                let (c, e) = variance_gamma_head(t);
                power_head(c, e, EPS_X).mass
            } else {
                0.0
            };
            let pts = log_panels(EPS_X, b / scale, 2.0);
            let (body, _) = log_scale_integral(|x| pointwise::variance_gamma_pdf(t, x), &pts, "Laplace bin at 0")?;
            Ok(head + body.mass)
        }
        _ => Ok(integrate_fallible(
            |x| pointwise::pdf(spec, t, x),
            &[0.0, b],
            QuadOptions::tolerances(1e-18, 1e-11),
            "bin probability",
        )?
        .0),
    }
}

/// Bins from a Fourier grid laid on the bin lattice, with the far tails
/// from `t·w(x)`.
fn grid_bins(spec: &ProcessSpec, t: f64, m: u32) -> Result<QuantizedLaw> {
    let mf = m as f64;
    let ev = ExponentEvaluator::new(spec)?;
    let s = 1.0 / unit_frequency(&ev, t)?;
    let cut = crate::density::fft::find_cutoff(
        |eta| Ok(t * ev.psi(eta / s)?.re),
        t,
        crate::density::fft::MAX_CUTOFF * s.max(1.0),
    )?;
    let dx_nat = s * PI / cut.xi;
    let r = ((1.0 / (mf * dx_nat)).ceil().max(1.0) as usize).next_power_of_two();
    let half_width = (400.0 * s).max(16.0 / mf);
    let n = ((2.0 * (half_width * mf).ceil()) as usize * r).next_power_of_two().min(1 << 22);
    let k = (n / (2 * r)) as i64;
    let dx = 1.0 / (mf * r as f64);
    let grid: DensityGrid = density_on_lattice(spec, t, -(k as f64) / mf, dx, n)?;
    let mut law = quantized_pmf(&grid, m)?;
    law.method = EntropyMethod::GridBins;
    let left_edge = law.offset_index as f64 / mf;
    let right_edge = (law.offset_index + law.probs.len() as i64) as f64 / mf;
    let tails = levy_tail(spec, t, -left_edge, mf)? + levy_tail(spec, t, right_edge, mf)?;
    law.tail_entropy = tails.entropy;
    law.tail_mass = (1.0 - kahan_sum(law.probs.iter().copied())).max(0.0);
    Ok(law)
}

/// `H_{n,m}(L) = n · H([L_{1/n}]_m)`.
pub fn process_entropy(spec: &ProcessSpec, n: u32, m: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::Precondition("time quantization n must be at least 1".into()));
    }
    Ok(n as f64 * discrete_entropy(&quantized_law(spec, 1.0 / n as f64, m)?))
}

/// `H([L_t]_m) - log m - h(L_t)`.
pub fn renyi_gap(spec: &ProcessSpec, t: f64, m: u32) -> Result<f64> {
    let quantized = discrete_entropy(&quantized_law(spec, t, m)?);
    let h = marginal_entropy(spec, t)?;
    Ok(quantized - (m as f64).ln() - h.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::gamma_entropy_closed_form;
    use crate::special::normal_cdf;
    use std::f64::consts::E;

    fn oracle_gauss_quantized(sigma: f64, m: f64) -> f64 {
        let mut h = 0.0;
        for k in -2000..2000 {
            let p = normal_cdf((k + 1) as f64 / (m * sigma)) - normal_cdf(k as f64 / (m * sigma));
            h += neg_plogp(p);
        }
        h
    }

    #[test]
    fn wiener_and_cauchy_marginals() {
        for &t in &[1.0, 0.01] {
            let h = marginal_entropy(&ProcessSpec::wiener(1.0, 0.0).unwrap(), t).unwrap();
            assert!((h.value - 0.5 * (2.0 * PI * E * t).ln()).abs() < 1e-6, "t={t}: {h:?}");
        }
        let h = marginal_entropy(&ProcessSpec::sas(1.0, 1.0).unwrap(), 1.0).unwrap();
        assert!((h.value - (4.0 * PI).ln()).abs() < 1e-12);
    }

    #[test]
    fn stable_quadrature_scaling_and_limits() {
        // the quadrature route near α = 1 and α = 2 approaches the closed forms
        let near_one = stable_entropy(1.001, 1.0).unwrap();
        assert!((near_one.value - (4.0 * PI).ln()).abs() < 5e-3, "{near_one:?}");
        let near_two = stable_entropy(1.999, 1.0).unwrap();
        assert!((near_two.value - 0.5 * (4.0 * PI * E).ln()).abs() < 5e-3, "{near_two:?}");
        let a = stable_entropy(0.5, 1.0).unwrap();
        let b = stable_entropy(0.5, 0.25).unwrap();
        assert!((a.value - b.value - 2.0 * 4f64.ln()).abs() < 1e-12);
        assert!(a.err < 1e-6, "{a:?}");
    }

    #[test]
    fn laplace_entropy_at_t_one_is_exact() {
        // L_1 is the standard Laplace law with entropy 1 + log 2
        let h = marginal_entropy(&ProcessSpec::laplace(1.0).unwrap(), 1.0).unwrap();
        assert!((h.value - (1.0 + 2f64.ln())).abs() < 1e-9, "{h:?}");
        let h = marginal_entropy(&ProcessSpec::laplace(3.0).unwrap(), 1.0).unwrap();
        assert!((h.value - (1.0 + 6f64.ln())).abs() < 1e-9, "{h:?}");
        for &t in &[0.05, 0.3] {
            let h = marginal_entropy(&ProcessSpec::laplace(1.0).unwrap(), t).unwrap();
            assert!(h.err < 1e-8, "t={t}: {h:?}");
        }
    }

    #[test]
    fn gamma_density_path_matches_closed_form() {
        let spec = ProcessSpec::gamma(1.0, 1.0).unwrap();
        for &t in &[1.2, 2.0, 5.0] {
            let h = marginal_entropy(&spec, t).unwrap();
            let exact = gamma_entropy_closed_form(1.0, 1.0, t);
            assert!((h.value - exact).abs() < 1e-3, "t={t}: {h:?} vs {exact}");
        }
    }

    #[test]
    fn process_entropy_examples() {
        let w = ProcessSpec::wiener(1.0, 0.0).unwrap();
        let h11 = process_entropy(&w, 1, 1).unwrap();
        assert!((h11 - oracle_gauss_quantized(1.0, 1.0)).abs() < 1e-12);
        let s = ProcessSpec::sas(2.0, 0.5).unwrap();
        let h48 = process_entropy(&s, 4, 8).unwrap();
        assert!((h48 - 4.0 * oracle_gauss_quantized(0.5, 8.0)).abs() < 1e-11);
        let one_step = discrete_entropy(&quantized_law(&s, 0.25, 8).unwrap());
        assert!((h48 - 4.0 * one_step).abs() < 1e-15);
    }

    #[test]
    fn renyi_gap_examples() {
        let w = ProcessSpec::wiener(1.0, 0.0).unwrap();
        let g4 = renyi_gap(&w, 1.0, 1 << 4).unwrap();
        let g12 = renyi_gap(&w, 1.0, 1 << 12).unwrap();
        assert!(g12.abs() < 1e-3 && g12.abs() < g4.abs(), "{g4} {g12}");
        let e = ProcessSpec::gamma(1.0, 1.0).unwrap();
        let mut prev = f64::INFINITY;
        for k in 4..=12 {
            let g = renyi_gap(&e, 1.0, 1 << k).unwrap().abs();
            assert!(g < prev, "m=2^{k}: {g}");
            prev = g;
        }
    }

    #[test]
    fn quantized_routes_are_normalized() {
        for (spec, t, m) in [
            (ProcessSpec::sas(0.5, 1.0).unwrap(), 1.0, 4),
            (ProcessSpec::laplace(1.0).unwrap(), 0.25, 8),
            (ProcessSpec::layered_stable(0.8, 1.6, 1.0, 1.0).unwrap(), 0.5, 4),
            (ProcessSpec::tempered_stable(1.2, 1.0, 1.0, 1.0).unwrap(), 1.0, 2),
            (ProcessSpec::sas(1.0, 1.0).unwrap(), 0.5, 16),
        ] {
            let law = quantized_law(&spec, t, m).unwrap();
            assert!((law.total() - 1.0).abs() < 1e-6, "{spec}: {}", law.total());
            assert!(law.probs.iter().all(|p| *p >= 0.0));
        }
    }

    #[test]
    fn pdf_bins_against_exact_and_adaptive_bins() {
        // Laplace at t = 1 has CDF 1 - e^{-x}/2 for x >= 0
        let spec = ProcessSpec::laplace(1.0).unwrap();
        for m in [1u32, 16, 1024] {
            let law = quantized_law(&spec, 1.0, m).unwrap();
            let mf = m as f64;
            for (i, p) in law.probs.iter().enumerate() {
                let k = law.offset_index + i as i64;
                let (a, b) = (k as f64 / mf, (k + 1) as f64 / mf);
                let exact = if a >= 0.0 { 0.5 * ((-a).exp() - (-b).exp()) } else { 0.5 * (b.exp() - a.exp()) };
                assert!((p - exact).abs() < 1e-12 * exact + 1e-17, "m={m} k={k}: {p} vs {exact}");
            }
        }
        let spec = ProcessSpec::sas(0.7, 1.0).unwrap();
        let law = quantized_law(&spec, 0.3, 8).unwrap();
        let opts = QuadOptions::tolerances(1e-300, 1e-12);
        for k in [1i64, 2, 7, 40, 91, -5] {
            let i = (k - law.offset_index) as usize;
            let (a, b) = (k as f64 / 8.0, (k + 1) as f64 / 8.0);
            let oracle = integrate_fallible(|x| pointwise::pdf(&spec, 0.3, x), &[a, b], opts, "oracle").unwrap().0;
            assert!((law.probs[i] / oracle - 1.0).abs() < 1e-10, "k={k}: {} vs {oracle}", law.probs[i]);
        }
    }
}
