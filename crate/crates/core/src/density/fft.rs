//! Discrete Fourier inversion of a characteristic function onto a uniform grid.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// `|Φ|` level at which the spectrum is considered negligible.
pub const TARGET_DECAY: f64 = 1e-12;
/// `|Φ|` must be below this at the cutoff or inversion is refused.
pub const DECAY_CHECK: f64 = 1e-8;
/// Largest frequency cutoff the inversion will use.
pub const MAX_CUTOFF: f64 = 1e7;
/// Largest FFT length (points) the inversion will attempt.
pub const MAX_FFT_LEN: usize = 1 << 24;

/// Frequency cutoff chosen for an inversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cutoff {
    pub xi: f64,
    /// `|Φ(Ξ)|` at the chosen cutoff
    pub decay: f64,
}

/// Finds `Ξ` with `exp(Re log Φ(Ξ)) < TARGET_DECAY`, capped at `max_cutoff`.
///
/// `log_phi_re` must return `Re log Φ(ξ)` for `ξ > 0` and be (roughly)
/// decreasing. Fails with [`Error::NonIntegrable`] when even the cap leaves
/// `|Φ| >= DECAY_CHECK`.
pub fn find_cutoff(log_phi_re: impl Fn(f64) -> Result<f64>, t: f64, max_cutoff: f64) -> Result<Cutoff> {
    let target = TARGET_DECAY.ln();
    let mut hi = 1.0;
    let mut v = log_phi_re(hi)?;
    let mut lo = 0.0;
    while v > target {
        if hi >= max_cutoff {
            let decay = v.exp();
            if decay >= DECAY_CHECK {
                return Err(Error::NonIntegrable { t, cutoff: max_cutoff, decay });
            }
            return Ok(Cutoff { xi: max_cutoff, decay });
        }
        lo = hi;
        hi = (hi * 2.0).min(max_cutoff);
        v = log_phi_re(hi)?;
    }
    // bisect down to within 2% of the crossing
    while hi - lo > 0.02 * hi {
        let mid = 0.5 * (lo + hi);
        let vm = log_phi_re(mid)?;
        if vm > target {
            lo = mid;
        } else {
            hi = mid;
            v = vm;
        }
    }
    Ok(Cutoff { xi: hi, decay: v.exp() })
}

/// Result of [`invert`].
#[derive(Debug, Clone)]
pub struct Inversion {
    pub values: Vec<f64>,
    /// Mass removed by clipping negative samples to zero (as `dx·Σ|negative|`).
    pub clipped_mass: f64,
    /// Oversampling factor used internally to reach the cutoff.
    pub oversample: usize,
    /// Highest frequency actually represented, `π / (dx / oversample)`.
    pub effective_cutoff: f64,
}

/// Samples the density with characteristic function `phi` at
/// `x_j = x0 + j·dx`, `j = 0..n`.
///
/// The transform runs over a period of twice the window (extra points are
/// discarded), so `1 - dx·Σ values` measures the mass outside the window
/// rather than wrapping it back in. If `π/dx < cutoff` the grid is refined
/// internally by a power of two and subsampled, as far as [`MAX_FFT_LEN`]
/// allows; check `effective_cutoff` for truncation.
///
/// For power-law tails the periodic images still leak into the window; pass
/// `tail`, a model of the density far from the origin, to subtract them.
pub fn invert<F>(
    phi: F,
    x0: f64,
    dx: f64,
    n: usize,
    cutoff: f64,
    tail: Option<&(dyn Fn(f64) -> f64 + Sync)>,
) -> Result<Inversion>
where
    F: Fn(f64) -> Result<Complex64> + Sync,
{
    if 2 * n > MAX_FFT_LEN {
        return Err(Error::Precondition(format!("grid of {n} points exceeds the FFT size limit")));
    }
    let mut oversample = 1usize;
    while PI / (dx / oversample as f64) < cutoff && 4 * n * oversample <= MAX_FFT_LEN {
        oversample *= 2;
    }
    let fine_n = n * oversample;
    let n_fft = 2 * fine_n;
    let fine_dx = dx / oversample as f64;
    // window sits in the middle of the doubled period
    let start = x0 - (fine_n / 2) as f64 * fine_dx;
    let d_eta = 2.0 * PI / (n_fft as f64 * fine_dx);
    let half = n_fft / 2;

    let spectrum: Vec<Complex64> =
        (0..=half).into_par_iter().map(|k| phi(k as f64 * d_eta)).collect::<Result<Vec<_>>>()?;

    let mut buf: Vec<Complex64> = (0..n_fft)
        .map(|idx| {
            let (k, weight) = if idx < half {
                (idx as i64, 1.0)
            } else if idx == half {
                (-(half as i64), 0.5)
            } else {
                (idx as i64 - n_fft as i64, 1.0)
            };
            let value = if k >= 0 { spectrum[k as usize] } else { spectrum[(-k) as usize].conj() };
            let eta = k as f64 * d_eta;
            value * Complex64::from_polar(weight, -eta * start)
        })
        .collect();
    // the Nyquist term's mirror image (+half) is folded into the real part below
    let nyquist = spectrum[half] * Complex64::from_polar(0.5, -(half as f64) * d_eta * start);

    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(n_fft).process(&mut buf);

    let norm = d_eta / (2.0 * PI);
    let first = fine_n / 2;
    let period = n_fft as f64 * fine_dx;
    let images = tail.map(|q| ImageCorrection::new(q, x0, dx * (n - 1) as f64, period));
    let mut values = Vec::with_capacity(n);
    let mut clipped = 0.0;
    for j in 0..n {
        let idx = first + j * oversample;
        // e^{-2πi·half·idx/n_fft} = (-1)^idx
        let sign = if idx % 2 == 0 { 1.0 } else { -1.0 };
        let mut v = norm * (buf[idx].re + sign * nyquist.re);
        v += norm * truncated_tail(spectrum[half], half as f64 * d_eta, d_eta, x0 + j as f64 * dx, fine_dx);
        if let Some(images) = &images {
            v -= images.at(j as f64 * dx);
        }
        if v < 0.0 {
            clipped += -v;
            values.push(0.0);
        } else {
            values.push(v);
        }
    }
    Ok(Inversion { values, clipped_mass: clipped * dx, oversample, effective_cutoff: PI / fine_dx })
}

/// Frequencies past the cutoff, `Σ_{|k|>K} Φ(kΔ)e^{-ikΔx}` plus the half
/// Nyquist weights, for `Φ` slowly varying beyond `Ξ = KΔ`. Summation by
/// parts gives `2 Re[Φ(Ξ)e^{-iΞx}(1+z)/(2(1-z))]` with `z = e^{-iΔx}`.
/// Only matters when `|Φ(Ξ)|` is not negligible, as for the gamma cusp.
/// Skipped within one fine step of the origin, where the sum does not
/// oscillate.
fn truncated_tail(phi_cut: Complex64, cutoff: f64, d_eta: f64, x: f64, fine_dx: f64) -> f64 {
    let half_angle = 0.5 * d_eta * x;
    let s = half_angle.sin();
    if s.abs() < (0.5 * d_eta * fine_dx).sin() {
        return 0.0;
    }
    let edge = phi_cut * Complex64::from_polar(1.0, -cutoff * x);
    // (1+z)/(1-z) = -i·cot(Δx/2)
    half_angle.cos() / s * edge.im
}

/// `Σ_{k≠0} q(x + kP)` over a window, tabulated on a coarse grid and read
/// back by linear interpolation (it varies on the scale of the period).
struct ImageCorrection {
    step: f64,
    values: Vec<f64>,
}

impl ImageCorrection {
    const NODES: usize = 257;
    const DIRECT: usize = 64;

    fn new(q: &(dyn Fn(f64) -> f64 + Sync), x0: f64, width: f64, period: f64) -> Self {
        let step = width / (Self::NODES - 1) as f64;
        let values = (0..Self::NODES)
            .into_par_iter()
            .map(|i| {
                let x = x0 + i as f64 * step;
                let f = |k: f64| q(x + k * period) + q(x - k * period);
                let direct: f64 = (1..=Self::DIRECT).map(|k| f(k as f64)).sum();
                // the rest as an integral over k on doubling panels
                let mut pts = vec![Self::DIRECT as f64 + 0.5];
                for _ in 0..60 {
                    pts.push(2.0 * pts.last().expect("nonempty"));
                }
                let rest = crate::quadrature::integrate_with_breakpoints(
                    f,
                    &pts,
                    crate::quadrature::QuadOptions::tolerances(1e-300, 1e-8),
                );
                direct + rest.value
            })
            .collect();
        ImageCorrection { step, values }
    }

    /// Correction at offset `u` from the window start.
    fn at(&self, u: f64) -> f64 {
        let a = (u / self.step).max(0.0);
        let i = (a.floor() as usize).min(Self::NODES - 2);
        let f = a - i as f64;
        self.values[i] * (1.0 - f) + self.values[i + 1] * f
    }
}
