//! Random streams and per-family samplers for `L_t`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Exp1, Gamma, Normal};

use crate::error::{Error, Result};
use crate::process_model::ProcessSpec;

/// Draws per counter block. Each block has its own ChaCha stream, so the
/// output does not depend on how blocks are spread over threads.
pub const BLOCK: usize = 1 << 14;

fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// ChaCha key for the words given; different purposes use different tags.
pub(crate) fn derive_key(words: &[u64]) -> [u8; 32] {
    let mut state = 0u64;
    for &w in words {
        state ^= w;
        splitmix(&mut state);
    }
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix(&mut state).to_le_bytes());
    }
    key
}

/// Generator for block `block` of the stream keyed by `key`.
pub(crate) fn block_rng(key: [u8; 32], block: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::from_seed(key);
    rng.set_stream(block);
    rng
}

/// One family sampler, prepared for a fixed `t`.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Sampler {
    Gaussian(Normal<f64>),
    Stable { alpha: f64, scale: f64 },
    Gamma(Gamma<f64>),
    GammaDifference(Gamma<f64>),
}

impl Sampler {
    pub fn new(spec: &ProcessSpec, t: f64) -> Result<Self> {
        let bad = |e: &dyn std::fmt::Display| Error::Precondition(format!("sampler for {spec} at t={t}: {e}"));
        Ok(match *spec {
            ProcessSpec::Wiener { sigma2, mu } => {
                Sampler::Gaussian(Normal::new(mu * t, (sigma2 * t).sqrt()).map_err(|e| bad(&e))?)
            }
            ProcessSpec::SaS { alpha, gamma } => Sampler::Stable { alpha, scale: (gamma * t).powf(1.0 / alpha) },
            ProcessSpec::Gamma { theta, tau } => Sampler::Gamma(Gamma::new(tau * t, theta).map_err(|e| bad(&e))?),
            // Φ = (1 + s²ξ²)^{-t} = (1 - isξ)^{-t} (1 + isξ)^{-t}
            ProcessSpec::Laplace { scale } => Sampler::GammaDifference(Gamma::new(t, scale).map_err(|e| bad(&e))?),
            _ => return Err(Error::Unsupported { family: spec.family().to_string(), operation: "sampling".into() }),
        })
    }

    pub fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Gaussian(n) => n.sample(rng),
            Sampler::Stable { alpha, scale } => scale * standard_stable(*alpha, rng),
            Sampler::Gamma(g) => g.sample(rng),
            Sampler::GammaDifference(g) => g.sample(rng) - g.sample(rng),
        }
    }
}

/// Chambers–Mallows–Stuck draw with `Φ(ξ) = exp(-|ξ|^α)`.
pub(crate) fn standard_stable<R: Rng>(alpha: f64, rng: &mut R) -> f64 {
    let u = loop {
        let v: f64 = rng.random();
        if v > 0.0 {
            break PI * (v - 0.5);
        }
    };
    let w: f64 = Exp1.sample(rng);
    if alpha == 1.0 {
        return u.tan();
    }
    (alpha * u).sin() / u.cos().powf(1.0 / alpha) * (((1.0 - alpha) * u).cos() / w).powf((1.0 - alpha) / alpha)
}
