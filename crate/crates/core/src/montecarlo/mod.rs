//! Monte Carlo sampling of increments, plug-in entropies of quantized
//! samples and fractional-moment checks.
//!
//! Random numbers come from ChaCha streams keyed by `(seed, spec, t)`; each
//! block of [`BLOCK`] draws uses its own stream, so batches are bit-identical
//! whatever the thread count.

pub mod format;
pub mod ks;
mod samplers;

use std::collections::HashMap;
use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::process_model::{fnv1a, unit_frequency, ExponentEvaluator, ProcessSpec};
use crate::quadrature::QuadOptions;
use crate::special::gamma;

pub use ks::{ks_p_value, ks_test, KsResult, MarginalCdf};
pub use samplers::BLOCK;
use samplers::{block_rng, derive_key, Sampler};

/// Draws used by [`fractional_moment_empirical`].
pub const MOMENT_DRAWS: usize = 1_000_000;
/// Bootstrap replicates for standard errors.
pub const BOOTSTRAP_REPLICATES: u64 = 100;
/// Smallest batch accepted by [`plugin_discrete_entropy`].
pub const MIN_PLUGIN_COUNT: usize = 1000;

const TAG_SAMPLES: u64 = 0x5a4d_504c;
const TAG_BOOTSTRAP: u64 = 0x424f_4f54;

/// i.i.d. draws of `L_t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub spec_id: String,
    pub t: f64,
    pub seed: u64,
    pub values: Vec<f64>,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn write_binary<W: Write>(&self, out: W) -> Result<()> {
        format::write_binary(out, self.seed, &self.values)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        format::write_csv(out, &self.values)
    }
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Precondition(format!("time must be positive and finite, got {t}")))
    }
}

/// `count` independent draws of `L_t`.
pub fn sample_increments(spec: &ProcessSpec, t: f64, count: usize, seed: u64) -> Result<SampleBatch> {
    spec.validate()?;
    check_time(t)?;
    if count == 0 {
        return Err(Error::Precondition("sample count must be positive".into()));
    }
    let sampler = Sampler::new(spec, t)?;
    let key = derive_key(&[TAG_SAMPLES, seed, spec.stable_hash(), t.to_bits()]);
    let blocks = count.div_ceil(BLOCK);
    let values: Vec<f64> = (0..blocks)
        .into_par_iter()
        .flat_map_iter(|b| {
            let len = BLOCK.min(count - b * BLOCK);
            let mut rng = block_rng(key, b as u64);
            (0..len).map(move |_| sampler.draw(&mut rng))
        })
        .collect();
    Ok(SampleBatch { spec_id: spec.id(), t, seed, values })
}

/// Standard deviation of `stat` over bootstrap replicates; replicate `r`
/// draws from stream `r` of `key`.
fn bootstrap_stderr(key: [u8; 32], stat: impl Fn(&mut ChaCha12Rng) -> f64 + Sync) -> f64 {
    let reps: Vec<f64> = (0..BOOTSTRAP_REPLICATES).into_par_iter().map(|r| stat(&mut block_rng(key, r))).collect();
    let n = reps.len() as f64;
    let mean = reps.iter().sum::<f64>() / n;
    (reps.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Plug-in entropy estimate with its bootstrap standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PluginEntropy {
    pub estimate: f64,
    pub stderr: f64,
    /// Occupied bins.
    pub bins: usize,
}

/// Miller–Madow corrected plug-in entropy (nats) from bin counts.
fn miller_madow(counts: &[u32], n: usize) -> f64 {
    let nf = n as f64;
    let mut h = 0.0;
    let mut occupied = 0usize;
    for &c in counts {
        if c > 0 {
            occupied += 1;
            let p = c as f64 / nf;
            h -= p * p.ln();
        }
    }
    h + (occupied as f64 - 1.0) / (2.0 * nf)
}

/// Entropy of `[L_t]_m` estimated from a batch by histogram plug-in.
pub fn plugin_discrete_entropy(batch: &SampleBatch, m: u32) -> Result<PluginEntropy> {
    let n = batch.len();
    if n < MIN_PLUGIN_COUNT {
        return Err(Error::Precondition(format!("plug-in entropy needs at least {MIN_PLUGIN_COUNT} draws, got {n}")));
    }
    if m == 0 {
        return Err(Error::Precondition("quantization m must be at least 1".into()));
    }
    let mf = f64::from(m);
    let mut index: HashMap<i64, u32> = HashMap::new();
    let mut counts: Vec<u32> = Vec::new();
    let labels: Vec<u32> = batch
        .values
        .iter()
        .map(|&x| {
            let bin = (mf * x).floor() as i64;
            let next = index.len() as u32;
            let id = *index.entry(bin).or_insert(next);
            if id as usize == counts.len() {
                counts.push(0);
            }
            counts[id as usize] += 1;
            id
        })
        .collect();
    let estimate = miller_madow(&counts, n);
    let key =
        derive_key(&[TAG_BOOTSTRAP, batch.seed, fnv1a(batch.spec_id.as_bytes()), batch.t.to_bits(), u64::from(m)]);
    let stderr = bootstrap_stderr(key, |rng| {
        let mut c = vec![0u32; counts.len()];
        for _ in 0..n {
            c[labels[rng.random_range(0..n)] as usize] += 1;
        }
        miller_madow(&c, n)
    });
    Ok(PluginEntropy { estimate, stderr, bins: counts.len() })
}

/// Monte Carlo mean with bootstrap standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub value: f64,
    pub stderr: f64,
    pub draws: usize,
}

fn check_moment_orders(beta: f64, q: f64) -> Result<()> {
    if !(beta > 0.0 && beta <= 2.0) {
        return Err(Error::Precondition(format!(
            "rescaling index beta must lie in (0, 2], got {beta}; beta = 0 laws have no non-trivial rescaled limit"
        )));
    }
    if !(q > 0.0 && q < 2.0) {
        return Err(Error::Precondition(format!("moment order q must lie in (0, 2), got {q}")));
    }
    Ok(())
}

/// `E|t^{-1/β} L_t|^q` by Monte Carlo over [`MOMENT_DRAWS`] draws.
pub fn fractional_moment_empirical(spec: &ProcessSpec, t: f64, beta: f64, q: f64, seed: u64) -> Result<MomentEstimate> {
    check_moment_orders(beta, q)?;
    if q >= beta.min(1.0) {
        return Err(Error::Precondition(format!(
            "moment order q = {q} must be below min(1, beta) = {}",
            beta.min(1.0)
        )));
    }
    let batch = sample_increments(spec, t, MOMENT_DRAWS, seed)?;
    let scale = t.powf(-1.0 / beta);
    let y: Vec<f64> = batch.values.iter().map(|x| (scale * x).abs().powf(q)).collect();
    let n = y.len();
    let value = y.iter().sum::<f64>() / n as f64;
    let key = derive_key(&[TAG_BOOTSTRAP, seed, spec.stable_hash(), t.to_bits(), q.to_bits()]);
    let stderr = bootstrap_stderr(key, |rng| (0..n).map(|_| y[rng.random_range(0..n)]).sum::<f64>() / n as f64);
    Ok(MomentEstimate { value, stderr, draws: n })
}

/// Supremum of the finite absolute moment orders of `L_t`.
pub fn moment_index(spec: &ProcessSpec) -> f64 {
    match *spec {
        ProcessSpec::SaS { alpha, .. } if alpha < 2.0 => alpha,
        ProcessSpec::LayeredStable { alpha_inf, .. } => alpha_inf,
        _ => f64::INFINITY,
    }
}

/// `E|N|^q` for a standard normal `N`.
pub fn gaussian_abs_moment(q: f64) -> f64 {
    2f64.powf(0.5 * q) * gamma(0.5 * (q + 1.0)) / std::f64::consts::PI.sqrt()
}

/// `2 ∫_0^∞ (1 - Re Φ(ξ)) ξ^{-q-1} dξ` on the log scale `ξ = e^s`, with
/// `log Φ` given by `log_phi`.
///
/// `s_e` locates the bulk of `1 - Re Φ`, `kappa` is its power-law order at 0.
fn fourier_moment_integral(log_phi: impl Fn(f64) -> Result<Complex64>, q: f64, s_e: f64, kappa: f64) -> Result<f64> {
    let lo = s_e - 40.0 / (kappa - q);
    let hi = s_e + 40.0 / q;
    let pts: Vec<f64> = {
        let panels = (hi - lo).ceil() as usize;
        (0..=panels).map(|k| lo + (hi - lo) * k as f64 / panels as f64).collect()
    };
    // 1 - Re e^{a+ib} = -expm1(a) + 2 e^a sin²(b/2), without cancellation
    let one_minus_re = |xi: f64| -> Result<f64> {
        let z = log_phi(xi)?;
        Ok(-z.re.exp_m1() + 2.0 * z.re.exp() * (0.5 * z.im).sin().powi(2))
    };
    let (body, _) = crate::quadrature::integrate_fallible(
        |s: f64| Ok(one_minus_re(s.exp())? * (-q * s).exp()),
        &pts,
        QuadOptions::tolerances(1e-300, 1e-10),
        "fractional moment integral",
    )?;
    // beyond `hi`, Re Φ is negligible
    Ok(2.0 * (body + (-q * hi).exp() / q))
}

/// `c_q` such that `E|X|^q = c_q ∫ (1 - Re Φ_X(ξ)) |ξ|^{-q-1} dξ`, fixed by the
/// standard normal.
pub fn calibrated_cq(q: f64) -> Result<f64> {
    check_moment_orders(1.0, q)?;
    let integral = fourier_moment_integral(|xi| Ok(Complex64::new(-0.5 * xi * xi, 0.0)), q, 0.0, 2.0)?;
    Ok(gaussian_abs_moment(q) / integral)
}

/// `E|t^{-1/β} L_t|^q` through the characteristic function of `L_t`.
pub fn fractional_moment_integral(spec: &ProcessSpec, t: f64, beta: f64, q: f64) -> Result<f64> {
    spec.validate()?;
    check_time(t)?;
    check_moment_orders(beta, q)?;
    let index = moment_index(spec);
    if q >= index {
        return Err(Error::Divergent(format!("E|X|^q is infinite for q = {q} >= {index}, the tail index of {spec}")));
    }
    let ev = ExponentEvaluator::new(spec)?;
    let rate = t.powf(-1.0 / beta);
    let s_e = (unit_frequency(&ev, t)? / rate).ln();
    let kappa = index.min(2.0);
    let log_phi = |xi: f64| Ok(t * ev.psi(rate * xi)?);
    Ok(calibrated_cq(q)? * fourier_moment_integral(log_phi, q, s_e, kappa)?)
}
