//! Lazily evaluated random codebooks shared by encoder and decoder.
//!
//! Symbol `k` of codeword `w` is a pure function of `(seed, w, k)`: a
//! counter-mode hash built from the SplitMix64 finalizer produces a 53-bit
//! uniform variate, which is mapped through the inverse CDF of the prior.
//! Nothing is materialized, so arbitrary `(w, k)` access is O(1) and the
//! encoder and decoder agree bit for bit on every platform.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{ChannelError, InputPrior};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CodebookError {
    #[error("message index {index} out of range for {count} messages")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("a codebook needs at least 2 messages, got {0}")]
    TooFewMessages(usize),
    #[error(transparent)]
    Prior(#[from] ChannelError),
    #[error("signal power {0} must be positive and finite")]
    BadPower(f64),
}

const MESSAGE_DOMAIN: u64 = 0x6a09_e667_f3bc_c908;
const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
const POSITION_STRIDE: u64 = 0xd1b5_4a32_d192_ed03;

/// SplitMix64 output finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[inline]
fn unit_interval(word: u64) -> f64 {
    (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Per-codeword hash key; derive once per message and reuse across positions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MessageKey(u64);

impl MessageKey {
    pub fn new(seed: u64, w: usize) -> Self {
        MessageKey(mix64(mix64(seed ^ MESSAGE_DOMAIN) ^ (w as u64).wrapping_mul(GOLDEN)))
    }

    #[inline]
    pub fn word(self, k: usize) -> u64 {
        mix64(self.0 ^ (k as u64).wrapping_add(1).wrapping_mul(POSITION_STRIDE))
    }

    /// Uniform variate in `[0, 1)` for position `k`.
    #[inline]
    pub fn uniform(self, k: usize) -> f64 {
        unit_interval(self.word(k))
    }
}

/// Discrete codebook with `message_count` infinite codewords drawn i.i.d. from `prior`.
#[derive(Clone, Debug, PartialEq)]
pub struct Codebook {
    seed: u64,
    message_count: usize,
    prior: InputPrior,
    // Binary priors take a single comparison per symbol.
    binary_cut: Option<f64>,
}

impl Codebook {
    pub fn new(seed: u64, message_count: usize, prior: InputPrior) -> Result<Self, CodebookError> {
        if message_count < 2 {
            return Err(CodebookError::TooFewMessages(message_count));
        }
        let binary_cut = (prior.len() == 2).then(|| prior.prob(0));
        Ok(Self { seed, message_count, prior, binary_cut })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn message_count(&self) -> usize {
        self.message_count
    }

    pub fn prior(&self) -> &InputPrior {
        &self.prior
    }

    pub fn key(&self, w: usize) -> MessageKey {
        MessageKey::new(self.seed, w)
    }

    /// Symbol at position `k` of the codeword identified by `key`.
    #[inline]
    pub fn symbol_with_key(&self, key: MessageKey, k: usize) -> usize {
        let u = key.uniform(k);
        match self.binary_cut {
            Some(cut) => {
                if u < cut || self.prior.prob(1) == 0.0 {
                    0
                } else {
                    1
                }
            }
            None => self.prior.symbol_for(u),
        }
    }

    /// `c_{w,k}`; positions are zero-based.
    pub fn codeword_symbol(&self, w: usize, k: usize) -> Result<usize, CodebookError> {
        self.check(w)?;
        Ok(self.symbol_with_key(self.key(w), k))
    }

    /// The first `n` symbols of codeword `w`.
    pub fn codeword_prefix(&self, w: usize, n: usize) -> Result<Vec<usize>, CodebookError> {
        self.check(w)?;
        let key = self.key(w);
        Ok((0..n).map(|k| self.symbol_with_key(key, k)).collect())
    }

    fn check(&self, w: usize) -> Result<(), CodebookError> {
        if w >= self.message_count {
            Err(CodebookError::IndexOutOfRange { index: w, count: self.message_count })
        } else {
            Ok(())
        }
    }
}

/// Gaussian codebook: symbols are `N(0, power)` via Box-Muller on two counter words.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianCodebook {
    seed: u64,
    message_count: usize,
    scale: f64,
}

impl GaussianCodebook {
    pub fn new(seed: u64, message_count: usize, power: f64) -> Result<Self, CodebookError> {
        if message_count < 2 {
            return Err(CodebookError::TooFewMessages(message_count));
        }
        if !(power > 0.0 && power.is_finite()) {
            return Err(CodebookError::BadPower(power));
        }
        Ok(Self { seed, message_count, scale: power.sqrt() })
    }

    pub fn message_count(&self) -> usize {
        self.message_count
    }

    pub fn key(&self, w: usize) -> MessageKey {
        MessageKey::new(self.seed, w)
    }

    #[inline]
    pub fn symbol_with_key(&self, key: MessageKey, k: usize) -> f64 {
        let u1 = key.uniform(2 * k);
        let u2 = key.uniform(2 * k + 1);
        let radius = (-2.0 * (1.0 - u1).ln()).sqrt();
        self.scale * radius * (std::f64::consts::TAU * u2).cos()
    }

    pub fn codeword_symbol(&self, w: usize, k: usize) -> Result<f64, CodebookError> {
        if w >= self.message_count {
            return Err(CodebookError::IndexOutOfRange { index: w, count: self.message_count });
        }
        Ok(self.symbol_with_key(self.key(w), k))
    }
}

/// Codebook section of an experiment config: `{"seed":..., "M":..., "prior":[...]}`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodebookSpec {
    #[serde(default)]
    pub seed: u64,
    /// Must match the source's message count when given.
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub message_count: Option<usize>,
    /// Defaults to the capacity-achieving prior of the channel.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<Vec<f64>>,
}
