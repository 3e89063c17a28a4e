//! Entropy and mass carried by the far tails of a density.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::process_model::ProcessSpec;
use crate::quadrature::{integrate_fallible, QuadOptions};
use crate::special::gamma;

/// Entropy part and mass of a tail.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct Tail {
    /// `∫ -q log(q/m)`; with `m = 1` the differential entropy contribution,
    /// otherwise the bin-entropy sum it approximates.
    pub entropy: f64,
    pub mass: f64,
}

impl std::ops::Add for Tail {
    type Output = Tail;
    fn add(self, o: Tail) -> Tail {
        Tail { entropy: self.entropy + o.entropy, mass: self.mass + o.mass }
    }
}

/// Tail of `q(x) = C x^{-a}` on `[x, ∞)`, `a > 1`.
pub(crate) fn power_tail(c: f64, a: f64, x: f64, m: f64) -> Tail {
    let k = a - 1.0;
    let mass = c * x.powf(-k) / k;
    let entropy = -(c.ln() - m.ln()) * mass + a * c * x.powf(-k) * (x.ln() / k + 1.0 / (k * k));
    Tail { entropy, mass }
}

/// Tail of `C x^{-a}` restricted to `[x, y]`.
fn power_segment(c: f64, a: f64, x: f64, y: f64, m: f64) -> Tail {
    let (lo, hi) = (power_tail(c, a, x, m), power_tail(c, a, y, m));
    Tail { entropy: lo.entropy - hi.entropy, mass: lo.mass - hi.mass }
}

/// Tail of an arbitrary density model on `[x, ∞)`: geometric panels out to
/// `x·2^60`, then the power law `remainder = (C, a)` if given.
pub(crate) fn numeric_tail(
    q: impl Fn(f64) -> Result<f64>,
    x: f64,
    m: f64,
    remainder: Option<(f64, f64)>,
) -> Result<Tail> {
    let pts: Vec<f64> = (0..=60).map(|k| x * 2f64.powi(k)).collect();
    let opts = QuadOptions::tolerances(1e-300, 1e-10);
    let (entropy, _) = integrate_fallible(
        |u| {
            let v = q(u)?;
            Ok(if v > 0.0 { -v * (v.ln() - m.ln()) } else { 0.0 })
        },
        &pts,
        opts,
        "tail entropy integral",
    )?;
    let (mass, _) = integrate_fallible(&q, &pts, opts, "tail mass integral")?;
    let mut tail = Tail { entropy, mass };
    if let Some((c, a)) = remainder {
        tail = tail + power_tail(c, a, *pts.last().expect("nonempty"), m);
    }
    Ok(tail)
}

/// Tail on `[x, ∞)` of the small-time model `p_t(x) ≈ t·w(x)` built from the
/// Lévy density `w` of a jump-kernel family.
pub(crate) fn levy_tail(spec: &ProcessSpec, t: f64, x: f64, m: f64) -> Result<Tail> {
    match *spec {
        ProcessSpec::SaS { alpha, gamma: g } if alpha < 2.0 => {
            Ok(power_tail(t * g * gamma(alpha + 1.0) * (0.5 * PI * alpha).sin() / PI, alpha + 1.0, x, m))
        }
        ProcessSpec::LayeredStable { alpha0, alpha_inf, a0, a_inf } => {
            let far = power_tail(t * a_inf, alpha_inf + 1.0, x.max(1.0), m);
            Ok(if x < 1.0 { power_segment(t * a0, alpha0 + 1.0, x, 1.0, m) + far } else { far })
        }
        ProcessSpec::TemperedStable { alpha, p, lambda, c } => {
            let q = |u: f64| Ok(t * c * (-lambda * u.powf(p)).exp() * u.powf(-alpha - 1.0));
            // beyond λu^p ≈ 745 the model underflows
            let end = (745.0 / lambda).powf(1.0 / p);
            if x >= end {
                return Ok(Tail::default());
            }
            let mut pts = vec![x];
            while *pts.last().expect("nonempty") < end {
                let next = (pts.last().expect("nonempty") * 2.0).min(end);
                pts.push(next);
            }
            let opts = QuadOptions::tolerances(1e-300, 1e-10);
            let (entropy, _) = integrate_fallible(
                |u| {
                    let v = q(u)?;
                    Ok(if v > 0.0 { -v * (v.ln() - m.ln()) } else { 0.0 })
                },
                &pts,
                opts,
                "tempered tail entropy",
            )?;
            let (mass, _) = integrate_fallible(q, &pts, opts, "tempered tail mass")?;
            Ok(Tail { entropy, mass })
        }
        _ => Err(Error::Unsupported { family: spec.family().to_string(), operation: "Levy-density tail model".into() }),
    }
}
