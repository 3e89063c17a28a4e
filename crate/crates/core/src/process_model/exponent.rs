//! Characteristic exponents.
//!
//! Closed forms cover Wiener, SaS, Gamma and Laplace. The two jump-kernel
//! families use `Ψ(ξ) = 2 ∫_0^∞ (cos ξt - 1) w(t) dt`, split at
//! `δ = min(1, 1/|ξ|)`: the piece on `(0, δ]` is a power series (`|ξ|δ <= 1`),
//! and the oscillatory remainder `∫_δ^∞ e^{iξt} w(t) dt` is moved onto a ray
//! in the upper half plane where the integrand decays exponentially.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::spec::ProcessSpec;
use crate::error::{Error, Result};
use crate::quadrature::{integrate_with_breakpoints, QuadOptions, Quadrature};
use crate::special::{gamma, ln_gamma, stable_constant};

/// How a value of Ψ was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMethod {
    ClosedForm,
    /// Convergent or asymptotic expansion in powers of `|ξ|`.
    Series,
    Quadrature,
}

/// One evaluation of the characteristic exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharExponentEval {
    pub xi: f64,
    pub psi: Complex64,
    pub method: EvalMethod,
    pub abs_err: f64,
}

/// Evaluator holding per-process constants, cheap to clone and `Sync`.
#[derive(Debug, Clone)]
pub struct ExponentEvaluator {
    spec: ProcessSpec,
    kernel: Kernel,
}

#[derive(Debug, Clone)]
enum Kernel {
    Closed,
    Layered(Layered),
    Tempered(Box<Tempered>),
}

// ray panels stop once e^{-y sin θ} is below this
const RAY_DECAY: f64 = 46.0;
// |ξ| above which the layered remainder uses its asymptotic expansion
const LAYERED_ASYMPTOTIC: f64 = 40.0;

impl ExponentEvaluator {
    pub fn new(spec: &ProcessSpec) -> Result<Self> {
        spec.validate()?;
        let kernel = match *spec {
            ProcessSpec::LayeredStable { alpha0, alpha_inf, a0, a_inf } => {
                Kernel::Layered(Layered { a0, alpha0, a_inf, alpha_inf, kappa0: stable_constant(alpha0) })
            }
            ProcessSpec::TemperedStable { alpha, p, lambda, c } => {
                Kernel::Tempered(Box::new(Tempered::new(alpha, p, lambda, c)?))
            }
            _ => Kernel::Closed,
        };
        Ok(Self { spec: *spec, kernel })
    }

    pub fn spec(&self) -> &ProcessSpec {
        &self.spec
    }

    /// Ψ(ξ) with method and error estimate.
    pub fn eval(&self, xi: f64) -> Result<CharExponentEval> {
        if !xi.is_finite() {
            return Err(Error::Precondition(format!("frequency must be finite, got {xi}")));
        }
        if xi == 0.0 {
            let method = match self.kernel {
                Kernel::Closed => EvalMethod::ClosedForm,
                _ => EvalMethod::Quadrature,
            };
            return Ok(CharExponentEval { xi, psi: Complex64::new(0.0, 0.0), method, abs_err: 0.0 });
        }
        let (psi, method, abs_err) = match &self.kernel {
            Kernel::Closed => (closed_form(&self.spec, xi), EvalMethod::ClosedForm, 0.0),
            Kernel::Layered(l) => {
                let (half, err, method) = l.half_psi(xi.abs())?;
                (Complex64::new(2.0 * half, 0.0), method, 2.0 * err)
            }
            Kernel::Tempered(tk) => {
                let (half, err, method) = tk.half_psi(xi.abs())?;
                (Complex64::new(2.0 * half, 0.0), method, 2.0 * err)
            }
        };
        Ok(CharExponentEval { xi, psi, method, abs_err })
    }

    /// Ψ(ξ) only.
    pub fn psi(&self, xi: f64) -> Result<Complex64> {
        self.eval(xi).map(|e| e.psi)
    }

    /// Characteristic function `exp(tΨ(ξ))` of `L_t`.
    pub fn char_function(&self, t: f64, xi: f64) -> Result<Complex64> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Precondition(format!("time must be positive and finite, got {t}")));
        }
        Ok((self.psi(xi)? * t).exp())
    }
}

fn closed_form(spec: &ProcessSpec, xi: f64) -> Complex64 {
    match *spec {
        ProcessSpec::Wiener { sigma2, mu } => Complex64::new(-0.5 * sigma2 * xi * xi, mu * xi),
        ProcessSpec::SaS { alpha, gamma } => Complex64::new(-gamma * xi.abs().powf(alpha), 0.0),
        ProcessSpec::Gamma { theta, tau } => {
            // -τ log(1 - iθξ), principal branch
            let z = theta * xi;
            Complex64::new(-0.5 * tau * (z * z).ln_1p(), tau * z.atan())
        }
        ProcessSpec::Laplace { scale } => {
            let z = scale * xi;
            Complex64::new(-(z * z).ln_1p(), 0.0)
        }
        _ => unreachable!("jump-kernel families are not closed form"),
    }
}

fn check(q: &Quadrature<impl Copy + Into<Complex64>>, context: &str) -> Result<()> {
    if q.converged {
        Ok(())
    } else {
        let v: Complex64 = q.value.into();
        Err(Error::Numerical { context: context.to_string(), partial: v.re, abs_err: q.abs_err })
    }
}

/// `Σ_{k>=1} (-1)^k x^{2k} / ((2k)! (2k + e))` for `|x| <= 1`, with
/// `inner(k)` supplying any extra factor per power.
fn cosine_series(x: f64, mut weight: impl FnMut(usize) -> f64) -> f64 {
    let x2 = x * x;
    let mut pw = 1.0;
    let mut sum = 0.0;
    for k in 1..40 {
        pw *= -x2 / (((2 * k - 1) * (2 * k)) as f64);
        let term = pw * weight(k);
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() || pw == 0.0 {
            break;
        }
    }
    sum
}

#[derive(Debug, Clone)]
struct Layered {
    a0: f64,
    alpha0: f64,
    a_inf: f64,
    alpha_inf: f64,
    kappa0: f64,
}

impl Layered {
    /// Returns Ψ(x)/2 for `x > 0`.
    fn half_psi(&self, x: f64) -> Result<(f64, f64, EvalMethod)> {
        let (s0, s_inf) = (self.alpha0 + 1.0, self.alpha_inf + 1.0);
        if x <= 1.0 {
            let a = self.a0 * cosine_series(x, |k| 1.0 / (2.0 * k as f64 - self.alpha0));
            // ∫_1^∞ e^{ixt} t^{-s} dt on the vertical line t = 1 + iy/x
            let f = |y: f64| Complex64::new(1.0, y / x).powf(-s_inf) * (-y).exp();
            let mut pts = vec![0.0];
            let mut b = x / 8.0;
            while b < RAY_DECAY {
                pts.push(b);
                b *= 2.0;
            }
            pts.push(RAY_DECAY);
            let q = integrate_with_breakpoints(f, &pts, QuadOptions::tolerances(1e-15, 1e-13));
            check(&q, "layered stable tail integral")?;
            let g = Complex64::new(0.0, 1.0 / x) * Complex64::from_polar(1.0, x) * q.value;
            let c = self.a_inf * (g.re - 1.0 / self.alpha_inf);
            let err = self.a_inf * q.abs_err / x + 1e-16 * (a.abs() + c.abs());
            return Ok((a + c, err, EvalMethod::Quadrature));
        }
        let head = self.a0 * x.powf(self.alpha0) * self.kappa0 + self.a0 / self.alpha0 - self.a_inf / self.alpha_inf;
        let (m, m_err, method) = if x >= LAYERED_ASYMPTOTIC {
            let m = pochhammer_series(s_inf, x) * self.a_inf - pochhammer_series(s0, x) * self.a0;
            (m, 1e-15 * (self.a0 + self.a_inf), EvalMethod::Series)
        } else {
            let f = |y: f64| {
                let q = Complex64::new(1.0, y / x);
                (q.powf(-s_inf) * self.a_inf - q.powf(-s0) * self.a0) * (-y).exp()
            };
            let pts = [0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 24.0, 32.0, RAY_DECAY];
            let q = integrate_with_breakpoints(f, &pts, QuadOptions::tolerances(1e-15, 1e-13));
            check(&q, "layered stable oscillatory integral")?;
            (q.value, q.abs_err, EvalMethod::Quadrature)
        };
        let g = Complex64::new(0.0, 1.0 / x) * Complex64::from_polar(1.0, x) * m;
        let err = m_err / x + 1e-15 * head.abs();
        Ok((head + g.re, err, method))
    }
}

/// `Σ_k (s)_k (-i/x)^k`, the large-`x` expansion of `∫_0^∞ e^{-y} (1 + iy/x)^{-s} dy`,
/// truncated at its smallest term.
fn pochhammer_series(s: f64, x: f64) -> Complex64 {
    let step = Complex64::new(0.0, -1.0 / x);
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut k = 0.0;
    loop {
        let next = term * step * (s + k);
        if next.norm() >= term.norm() || next.norm() < 1e-18 {
            if next.norm() < term.norm() {
                sum += next;
            }
            break;
        }
        sum += next;
        term = next;
        k += 1.0;
    }
    sum
}

#[derive(Debug, Clone)]
struct Tempered {
    c: f64,
    alpha: f64,
    p: f64,
    lambda: f64,
    /// Ray direction `e^{iθ}`: `θ = π/2` for `p <= 1`, else `π/(4p)` so that
    /// `e^{-λ z^p}` decays at least as fast as it oscillates.
    ray: Complex64,
    /// `c ∫_1^∞ t^{-α-1} e^{-λ t^p} dt`
    w1: f64,
    w1_err: f64,
    /// `e^{-λ t^p}` is below `e^{-60}` past this point.
    t_max: f64,
    /// Coefficients `(ln|a_j|, sign_j, α - pj)` of the expansion in `|ξ|^{α - pj}`.
    series: Option<Vec<(f64, f64, f64)>>,
    series_const: f64,
}

impl Tempered {
    fn new(alpha: f64, p: f64, lambda: f64, c: f64) -> Result<Self> {
        let theta = if p <= 1.0 { FRAC_PI_2 } else { 0.5 * FRAC_PI_2 / p };
        let t_max = (60.0 / lambda).powf(1.0 / p).max(2.0);
        let pts = geometric_from_one(t_max);
        let q = integrate_with_breakpoints(
            |t: f64| c * t.powf(-alpha - 1.0) * (-lambda * t.powf(p)).exp(),
            &pts,
            QuadOptions::tolerances(1e-16, 1e-13),
        );
        check(&q, "tempered stable tail mass")?;
        let ratio = alpha / p;
        let series = if p <= 1.0 && (ratio - ratio.round()).abs() > 1e-6 {
            let mut coefs = Vec::new();
            for j in 0..400usize {
                let s = alpha - p * j as f64;
                let kappa = stable_constant(s);
                if kappa == 0.0 {
                    continue;
                }
                let ln_abs = c.ln() + j as f64 * lambda.ln() - ln_gamma(j as f64 + 1.0) + kappa.abs().ln();
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 } * kappa.signum();
                coefs.push((ln_abs, sign, s));
            }
            Some(coefs)
        } else {
            None
        };
        // -c times the regularized ∫_0^∞ t^{-α-1} e^{-λt^p} dt
        let series_const = if series.is_some() { -c / p * lambda.powf(ratio) * gamma(-ratio) } else { 0.0 };
        Ok(Self {
            c,
            alpha,
            p,
            lambda,
            ray: Complex64::from_polar(1.0, theta),
            w1: q.value,
            w1_err: q.abs_err,
            t_max,
            series,
            series_const,
        })
    }

    fn half_psi(&self, x: f64) -> Result<(f64, f64, EvalMethod)> {
        if let Some(v) = self.try_series(x) {
            return Ok(v);
        }
        self.quadrature(x)
    }

    fn try_series(&self, x: f64) -> Option<(f64, f64, EvalMethod)> {
        let coefs = self.series.as_ref()?;
        let ln_x = x.ln();
        let mut sum = self.series_const;
        let mut max_term = sum.abs();
        let mut prev = f64::INFINITY;
        for (j, &(ln_abs, sign, s)) in coefs.iter().enumerate() {
            let mag = (ln_abs + s * ln_x).exp();
            if !mag.is_finite() {
                return None;
            }
            sum += sign * mag;
            max_term = max_term.max(mag);
            if j >= 2 && mag < prev && mag <= 1e-17 * sum.abs().max(1e-300) {
                let round = 1e-16 * max_term * (j as f64 + 1.0);
                // reject if cancellation ate more than a few digits
                if max_term > 1e4 * sum.abs() {
                    return None;
                }
                return Some((sum, round + mag, EvalMethod::Series));
            }
            prev = mag;
        }
        None
    }

    fn w(&self, z: Complex64) -> Complex64 {
        let ln_z = z.ln();
        ((-self.alpha - 1.0) * ln_z - self.lambda * (self.p * ln_z).exp()).exp() * self.c
    }

    fn quadrature(&self, x: f64) -> Result<(f64, f64, EvalMethod)> {
        let (c, alpha, p, lambda) = (self.c, self.alpha, self.p, self.lambda);
        let delta = if x > 1.0 { 1.0 / x } else { 1.0 };
        let opts = QuadOptions::tolerances(1e-15, 1e-13);

        // A: ∫_0^δ (cos xt - 1) w(t) dt
        let u = lambda * delta.powf(p);
        let (a, a_err) = if u <= 4.0 {
            let a = c
                * delta.powf(-alpha)
                * cosine_series(x * delta, |k| {
                    let mut inner = 0.0;
                    let mut pw = 1.0;
                    for j in 0..200 {
                        let term = pw / (2.0 * k as f64 + p * j as f64 - alpha);
                        inner += term;
                        if term.abs() < 1e-18 * inner.abs() {
                            break;
                        }
                        pw *= -u / (j as f64 + 1.0);
                    }
                    inner
                });
            (a, 1e-15 * a.abs())
        } else {
            let mut pts: Vec<f64> = (0..60).map(|n| delta * 0.5f64.powi(n)).collect();
            pts.push(0.0);
            pts.reverse();
            let q = integrate_with_breakpoints(
                |t: f64| {
                    if t == 0.0 {
                        0.0
                    } else {
                        (-2.0 * (0.5 * x * t).sin().powi(2)) * c * t.powf(-alpha - 1.0) * (-lambda * t.powf(p)).exp()
                    }
                },
                &pts,
                opts,
            );
            check(&q, "tempered stable inner integral")?;
            (q.value, q.abs_err)
        };

        // W: c ∫_δ^1 t^{-α-1} e^{-λt^p} dt
        let (w, w_err) = if delta >= 1.0 {
            (0.0, 0.0)
        } else if lambda <= 4.0 {
            let ln_x = x.ln();
            let mut sum = 0.0;
            let mut pw = 1.0;
            for j in 0..300 {
                let s = alpha - p * j as f64;
                let e = if (s * ln_x).abs() < 1e-300 { ln_x } else { (s * ln_x).exp_m1() / s };
                let term = pw * e;
                sum += term;
                if j > 0 && term.abs() < 1e-18 * sum.abs() {
                    break;
                }
                pw *= -lambda / (j as f64 + 1.0);
            }
            (c * sum, 1e-15 * (c * sum).abs())
        } else {
            let pts = crate::quadrature::geometric_breakpoints(delta, 1.0, delta);
            let q =
                integrate_with_breakpoints(|t: f64| c * t.powf(-alpha - 1.0) * (-lambda * t.powf(p)).exp(), &pts, opts);
            check(&q, "tempered stable mass integral")?;
            (q.value, q.abs_err)
        };

        // G: ∫_δ^∞ e^{ixt} w(t) dt along t = δ + y e^{iθ} / x
        let sin_theta = self.ray.im;
        let y_max = RAY_DECAY / sin_theta;
        let i_ray = Complex64::i() * self.ray;
        let (g, g_err) = if x > 1.0 {
            // scaled: t = (1 + y e^{iθ}) / x
            let lead = self.ray * Complex64::from_polar(1.0, 1.0) * (c * x.powf(alpha));
            let scaled = |y: f64| {
                let z = Complex64::new(1.0, 0.0) + self.ray * y;
                let ln_z = z.ln();
                ((i_ray * y) + (-alpha - 1.0) * ln_z - lambda * x.powf(-p) * (p * ln_z).exp()).exp()
            };
            let mut pts = vec![0.0, 0.25, 0.5];
            let mut b = 1.0;
            while b < y_max {
                pts.push(b);
                b *= 2.0;
            }
            pts.push(y_max);
            let q = integrate_with_breakpoints(scaled, &pts, QuadOptions::tolerances(1e-16, 1e-13));
            check(&q, "tempered stable ray integral")?;
            (lead * q.value, lead.norm() * q.abs_err)
        } else if x * self.t_max < 2000.0 * PI {
            // few oscillations: stay on the real axis, Re G = ∫_1^T cos(xt) w(t) dt
            let step = PI / x;
            let mut pts = vec![1.0];
            let mut b = 1.5;
            while b < self.t_max {
                pts.push(b);
                b = (b * 1.5).min(b + step);
            }
            pts.push(self.t_max);
            let q = integrate_with_breakpoints(
                |t: f64| (x * t).cos() * c * t.powf(-alpha - 1.0) * (-lambda * t.powf(p)).exp(),
                &pts,
                opts,
            );
            check(&q, "tempered stable tail integral")?;
            (Complex64::new(q.value, 0.0), q.abs_err)
        } else {
            let lead = self.ray / x * Complex64::from_polar(1.0, x);
            let f = |y: f64| (i_ray * y).exp() * self.w(Complex64::new(1.0, 0.0) + self.ray * (y / x));
            let mut pts = vec![0.0];
            let mut b = x / 8.0;
            while b < y_max {
                pts.push(b);
                b *= 2.0;
            }
            pts.push(y_max);
            let q = integrate_with_breakpoints(f, &pts, QuadOptions::tolerances(1e-15 * x, 1e-13));
            check(&q, "tempered stable ray integral")?;
            (lead * q.value, lead.norm() * q.abs_err)
        };

        let value = a + g.re - w - self.w1;
        let err = a_err + g_err + w_err + self.w1_err + 1e-16 * (a.abs() + g.norm() + w.abs() + self.w1);
        Ok((value, err, EvalMethod::Quadrature))
    }
}

fn geometric_from_one(t_max: f64) -> Vec<f64> {
    let mut pts = vec![1.0];
    let mut b = 1.5;
    while b < t_max {
        pts.push(b);
        b *= 1.5;
    }
    pts.push(t_max);
    pts
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cos_minus_one(x: f64) -> f64 {
        -2.0 * (0.5 * x).sin().powi(2)
    }

    fn brute_force_half_psi(w: impl Fn(f64) -> f64, xi: f64, t_max: f64, nodes: usize, at_zero: f64) -> f64 {
        // composite trapezoid on [0, t_max]; `at_zero` is the integrand's limit at 0
        let h = t_max / nodes as f64;
        let mut sum = 0.5 * at_zero;
        for i in 1..=nodes {
            let t = i as f64 * h;
            let f = cos_minus_one(xi * t) * w(t);
            sum += if i == nodes { 0.5 * f } else { f };
        }
        sum * h
    }

    #[test]
    fn pochhammer_series_matches_quadrature() {
        for &(s, x) in &[(1.8, 40.0), (2.6, 55.0), (3.0, 1000.0)] {
            let q = integrate_with_breakpoints(
                |y: f64| Complex64::new(1.0, y / x).powf(-s) * (-y).exp(),
                &[0.0, 1.0, 4.0, 16.0, 50.0],
                QuadOptions::default(),
            );
            assert!((pochhammer_series(s, x) - q.value).norm() < 1e-13, "s={s} x={x}");
        }
    }

    #[test]
    fn layered_branches_agree_at_the_seams() {
        let ev = ExponentEvaluator::new(&ProcessSpec::layered_stable(0.8, 1.6, 1.0, 1.0).unwrap()).unwrap();
        for &x in &[1.0, LAYERED_ASYMPTOTIC] {
            let lo = ev.psi(x * (1.0 - 1e-12)).unwrap().re;
            let hi = ev.psi(x * (1.0 + 1e-12)).unwrap().re;
            assert!((lo - hi).abs() < 1e-10 * lo.abs().max(1.0), "x={x}: {lo} vs {hi}");
        }
    }

    #[test]
    fn layered_matches_brute_force() {
        let (a0, a_inf, al0, al_inf) = (1.0, 1.0, 0.8, 1.6);
        let ev = ExponentEvaluator::new(&ProcessSpec::layered_stable(al0, al_inf, a0, a_inf).unwrap()).unwrap();
        for &xi in &[0.3, 2.5, 70.0] {
            // (0,1] by series-free quadrature, (1,∞) via the explicit primitive beyond a far cutoff
            let near = integrate_with_breakpoints(
                |t: f64| cos_minus_one(xi * t) * a0 * t.powf(-al0 - 1.0),
                &crate::quadrature::geometric_breakpoints(0.0, 1.0, 1e-9),
                QuadOptions::with_abs_tol(1e-13),
            );
            let far_end = 4000.0;
            let mut pts: Vec<f64> = vec![1.0];
            let step = (PI / xi).min(0.5);
            while *pts.last().unwrap() + step < far_end {
                pts.push(pts.last().unwrap() + step);
            }
            pts.push(far_end);
            let far = integrate_with_breakpoints(
                |t: f64| cos_minus_one(xi * t) * a_inf * t.powf(-al_inf - 1.0),
                &pts,
                QuadOptions::with_abs_tol(1e-13),
            );
            // ∫_T^∞ (cos ξt - 1) t^{-s} dt ≈ -T^{-α}/α (oscillatory part is O(T^{-s}/ξ))
            let tail = -a_inf * far_end.powf(-al_inf) / al_inf;
            let expect = 2.0 * (near.value + far.value + tail);
            let got = ev.psi(xi).unwrap().re;
            assert!((got - expect).abs() < 1e-7 * expect.abs().max(1.0), "xi={xi}: {got} vs {expect}");
        }
    }

    #[test]
    fn tempered_matches_exponential_closed_form() {
        // p = 1: Ψ = cΓ(-α)[(λ - iξ)^α + (λ + iξ)^α - 2λ^α]
        let (alpha, lambda, c) = (1.2, 1.0, 1.0);
        let ev = ExponentEvaluator::new(&ProcessSpec::tempered_stable(alpha, 1.0, lambda, c).unwrap()).unwrap();
        for &xi in &[1e-3, 0.2, 0.9, 1.0, 1.7, 5.0, 33.0, 1e3, 1e6] {
            let z = Complex64::new(lambda, xi);
            let exact = c * gamma(-alpha) * (2.0 * z.powf(alpha).re - 2.0 * lambda.powf(alpha));
            let e = ev.eval(xi).unwrap();
            assert!((e.psi.re - exact).abs() < 1e-10 * exact.abs().max(1.0), "xi={xi}: {} vs {exact}", e.psi.re);
            let q = ev.get_tempered().unwrap().quadrature(xi).unwrap().0 * 2.0;
            assert!((q - exact).abs() < 1e-10 * exact.abs().max(1.0), "quadrature xi={xi}: {q} vs {exact}");
        }
    }

    #[test]
    fn tempered_alpha_one_matches_log_form_and_brute_force() {
        // α = p = 1: Ψ = 2c[Re((λ + iξ) log(λ + iξ)) - λ log λ]
        let ev = ExponentEvaluator::new(&ProcessSpec::tempered_stable(1.0, 1.0, 1.0, 1.0).unwrap()).unwrap();
        let xi = 5.0;
        let z = Complex64::new(1.0, xi);
        let exact = 2.0 * (z * z.ln()).re;
        let got = ev.psi(xi).unwrap().re;
        assert!((got - exact).abs() < 1e-11, "{got} vs {exact}");

        // (cos ξt - 1) e^{-t} / t² → -ξ²/2 as t → 0
        let brute = 2.0 * brute_force_half_psi(|t| (-t).exp() / (t * t), xi, 50.0, 10_000_000, -0.5 * xi * xi);
        assert!((got - brute).abs() < 1e-8, "{got} vs brute force {brute}");
    }

    #[test]
    fn tempered_stretched_kernels_match_real_axis_quadrature() {
        for &(alpha, p, lambda, c) in
            &[(0.7, 0.5, 2.0, 1.5), (1.5, 2.0, 1.0, 1.0), (1.2, 1.0, 6.0, 1.0), (0.9, 3.0, 0.5, 2.0)]
        {
            let ev = ExponentEvaluator::new(&ProcessSpec::tempered_stable(alpha, p, lambda, c).unwrap()).unwrap();
            let t_max = (60.0 / lambda).powf(1.0 / p);
            for &xi in &[0.4, 3.0, 25.0] {
                let mut pts = crate::quadrature::geometric_breakpoints(0.0, 1.0_f64.min(t_max), 1e-10);
                let step = PI / xi;
                let mut b = 1.0 + step;
                while b < t_max {
                    pts.push(b);
                    b += step;
                }
                pts.push(t_max);
                pts.dedup();
                let q = integrate_with_breakpoints(
                    |t: f64| cos_minus_one(xi * t) * c * t.powf(-alpha - 1.0) * (-lambda * t.powf(p)).exp(),
                    &pts,
                    QuadOptions::with_abs_tol(1e-13),
                );
                let expect = 2.0 * q.value;
                let got = ev.psi(xi).unwrap().re;
                assert!(
                    (got - expect).abs() < 1e-9 * expect.abs().max(1.0),
                    "({alpha},{p},{lambda},{c}) xi={xi}: {got} vs {expect}"
                );
            }
        }
    }

    #[test]
    fn layered_leading_constant_is_the_stable_constant() {
        let ev = ExponentEvaluator::new(&ProcessSpec::layered_stable(1.2, 2.0, 1.0, 1.0).unwrap()).unwrap();
        let x = 1e8;
        let ratio = ev.psi(x).unwrap().re / x.powf(1.2);
        assert!((ratio - 2.0 * stable_constant(1.2)).abs() < 1e-6);
    }

    impl ExponentEvaluator {
        fn get_tempered(&self) -> Option<&Tempered> {
            match &self.kernel {
                Kernel::Tempered(t) => Some(t),
                _ => None,
            }
        }
    }
}
