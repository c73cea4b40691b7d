//! Message sources: equiprobable and weighted message sets, blocks of i.i.d.
//! symbols mapped to message indices, and correlated message pairs.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mixture::{mixture_log_prob, CountMatrix};
use crate::scalar::{binary_entropy, entropy};
use crate::sequential::ThresholdScheme;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SourceError {
    #[error("distribution is empty")]
    Empty,
    #[error("probabilities sum to {0}, not 1")]
    NotNormalized(f64),
    #[error("probability {0} is negative or not finite")]
    BadProbability(f64),
    #[error("joint matrix is ragged")]
    Ragged,
    #[error("symbol {symbol} out of range for alphabet of size {alphabet}")]
    SymbolOutOfRange { symbol: usize, alphabet: usize },
    #[error("message index {index} out of range for {count} messages")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("epsilon = {0} must lie in (0, 1)")]
    BadEpsilon(f64),
    #[error("|S|^L = {alphabet}^{block_len} does not fit in memory-addressable message indices")]
    TooLarge { alphabet: usize, block_len: usize },
    #[error("invalid parameter: {0}")]
    BadParameter(String),
}

const SUM_TOLERANCE: f64 = 1e-9;
/// Largest `|S|^L` that block sources will index.
pub const MAX_INDEXED_MESSAGES: usize = 1 << 40;

fn validate(probs: &[f64]) -> Result<(), SourceError> {
    if probs.is_empty() {
        return Err(SourceError::Empty);
    }
    if let Some(&p) = probs.iter().find(|p| !(**p >= 0.0 && p.is_finite())) {
        return Err(SourceError::BadProbability(p));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(SourceError::NotNormalized(sum));
    }
    Ok(())
}

/// Distribution `π(w)` over `M` messages.
#[derive(Clone, Debug)]
pub struct MessageSource {
    probs: Vec<f64>,
    entropy_bits: f64,
    sampler: WeightedIndex<f64>,
}

impl MessageSource {
    pub fn new(probs: Vec<f64>) -> Result<Self, SourceError> {
        validate(&probs)?;
        if probs.len() < 2 {
            return Err(SourceError::BadParameter("need at least 2 messages".into()));
        }
        let sampler = WeightedIndex::new(&probs).map_err(|e| SourceError::BadParameter(e.to_string()))?;
        let entropy_bits = entropy(&probs);
        Ok(Self { probs, entropy_bits, sampler })
    }

    pub fn uniform(m: usize) -> Result<Self, SourceError> {
        Self::new(vec![1.0 / m as f64; m])
    }

    /// `π(w) ∝ (w + 1)^{-exponent}`.
    pub fn zipf(m: usize, exponent: f64) -> Result<Self, SourceError> {
        if !(exponent >= 0.0 && exponent.is_finite()) {
            return Err(SourceError::BadParameter(format!("zipf exponent {exponent}")));
        }
        let weights: Vec<f64> = (1..=m).map(|k| (k as f64).powf(-exponent)).collect();
        let z: f64 = weights.iter().sum();
        Self::new(weights.into_iter().map(|w| w / z).collect())
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn message_count(&self) -> usize {
        self.probs.len()
    }

    pub fn entropy_bits(&self) -> f64 {
        self.entropy_bits
    }

    /// `H(W) / log2 M`.
    pub fn per_bit_entropy(&self) -> f64 {
        self.entropy_bits / (self.probs.len() as f64).log2()
    }

    pub fn sample_message<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.sampler.sample(rng)
    }
}

/// Blocks of `L` i.i.d. symbols over `|S|` letters; block `s^L` is message
/// `Σ s_k |S|^{L-1-k}` (first symbol most significant).
#[derive(Clone, Debug)]
pub struct IidSymbolSource {
    gamma: Vec<f64>,
    block_len: usize,
    /// `None` when `|S|^L` exceeds the addressable index range; blocks can still be
    /// sampled and scored.
    message_count: Option<usize>,
    sampler: WeightedIndex<f64>,
}

impl IidSymbolSource {
    pub fn new(gamma: Vec<f64>, block_len: usize) -> Result<Self, SourceError> {
        validate(&gamma)?;
        if gamma.len() < 2 || block_len == 0 {
            return Err(SourceError::BadParameter("need |S| >= 2 and L >= 1".into()));
        }
        let message_count = u32::try_from(block_len)
            .ok()
            .and_then(|exp| gamma.len().checked_pow(exp))
            .filter(|&m| m <= MAX_INDEXED_MESSAGES);
        let sampler = WeightedIndex::new(&gamma).map_err(|e| SourceError::BadParameter(e.to_string()))?;
        Ok(Self { gamma, block_len, message_count, sampler })
    }

    pub fn alphabet_size(&self) -> usize {
        self.gamma.len()
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    /// `M = |S|^L`, if it fits the index range.
    pub fn message_count(&self) -> Option<usize> {
        self.message_count
    }

    fn indexed_count(&self) -> Result<usize, SourceError> {
        self.message_count.ok_or(SourceError::TooLarge { alphabet: self.alphabet_size(), block_len: self.block_len })
    }

    /// `log2 M = L·log2 |S|`.
    pub fn log2_message_count(&self) -> f64 {
        self.block_len as f64 * (self.alphabet_size() as f64).log2()
    }

    /// `L·H(γ)`.
    pub fn entropy_bits(&self) -> f64 {
        self.block_len as f64 * entropy(&self.gamma)
    }

    pub fn per_bit_entropy(&self) -> f64 {
        entropy(&self.gamma) / (self.alphabet_size() as f64).log2()
    }

    pub fn sample_block<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        (0..self.block_len).map(|_| self.sampler.sample(rng)).collect()
    }

    /// `log2 π_γ(s^L)`.
    pub fn log_prob(&self, block: &[usize]) -> f64 {
        block.iter().map(|&s| self.gamma[s].log2()).sum()
    }

    pub fn encode_block(&self, block: &[usize]) -> Result<usize, SourceError> {
        self.indexed_count()?;
        if block.len() != self.block_len {
            return Err(SourceError::BadParameter(format!("block length {} != {}", block.len(), self.block_len)));
        }
        let base = self.alphabet_size();
        block.iter().try_fold(0usize, |acc, &s| {
            if s >= base {
                Err(SourceError::SymbolOutOfRange { symbol: s, alphabet: base })
            } else {
                Ok(acc * base + s)
            }
        })
    }

    pub fn decode_index(&self, index: usize) -> Result<Vec<usize>, SourceError> {
        let count = self.indexed_count()?;
        if index >= count {
            return Err(SourceError::IndexOutOfRange { index, count });
        }
        let base = self.alphabet_size();
        let mut out = vec![0; self.block_len];
        let mut rest = index;
        for slot in out.iter_mut().rev() {
            *slot = rest % base;
            rest /= base;
        }
        Ok(out)
    }

    /// Exact message distribution (only sensible for small `M`).
    pub fn message_probs(&self) -> Result<Vec<f64>, SourceError> {
        (0..self.indexed_count()?).map(|w| Ok(self.log_prob(&self.decode_index(w)?).exp2())).collect()
    }
}

/// `log2 p̂(s^L)` under the Jeffreys (add-half) mixture over `|S|`-letter i.i.d. laws.
pub fn universal_source_log_prob(block: &[usize], alphabet_size: usize) -> Result<f64, SourceError> {
    if let Some(&s) = block.iter().find(|&&s| s >= alphabet_size) {
        return Err(SourceError::SymbolOutOfRange { symbol: s, alphabet: alphabet_size });
    }
    if alphabet_size < 2 {
        return Err(SourceError::BadParameter("alphabet size must be >= 2".into()));
    }
    let zeros = vec![0; block.len()];
    let cm = CountMatrix::from_pairs(alphabet_size, 1, block, &zeros).expect("symbols validated");
    Ok(mixture_log_prob(&cm))
}

/// `a = -log2 ε - log2 p̂(s^L)` for the message carrying block `s^L`.
pub fn universal_thresholds(block: &[usize], alphabet_size: usize, epsilon: f64) -> Result<f64, SourceError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(SourceError::BadEpsilon(epsilon));
    }
    Ok(-epsilon.log2() - universal_source_log_prob(block, alphabet_size)?)
}

/// Thresholds for every message of an i.i.d. block source, computed without knowledge of `γ`.
pub fn universal_threshold_scheme(src: &IidSymbolSource, epsilon: f64) -> Result<ThresholdScheme, SourceError> {
    let count = src.message_count().ok_or(SourceError::TooLarge {
        alphabet: src.alphabet_size(),
        block_len: src.block_len(),
    })?;
    let values = (0..count)
        .map(|w| universal_thresholds(&src.decode_index(w)?, src.alphabet_size(), epsilon))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ThresholdScheme::from_log_thresholds(values))
}

/// Joint law `π(w1, w2)` of a message pair.
#[derive(Clone, Debug)]
pub struct CorrelatedPairSource {
    joint: Vec<Vec<f64>>,
    marginal1: Vec<f64>,
    marginal2: Vec<f64>,
    conditional: Vec<Vec<f64>>,
    sampler: WeightedIndex<f64>,
}

impl CorrelatedPairSource {
    pub fn new(joint: Vec<Vec<f64>>) -> Result<Self, SourceError> {
        let cols = joint.first().map(Vec::len).ok_or(SourceError::Empty)?;
        if cols == 0 {
            return Err(SourceError::Empty);
        }
        if joint.iter().any(|r| r.len() != cols) {
            return Err(SourceError::Ragged);
        }
        let flat: Vec<f64> = joint.iter().flatten().copied().collect();
        validate(&flat)?;
        let marginal1: Vec<f64> = joint.iter().map(|r| r.iter().sum()).collect();
        let marginal2: Vec<f64> = (0..cols).map(|j| joint.iter().map(|r| r[j]).sum()).collect();
        let conditional = joint
            .iter()
            .zip(&marginal1)
            .map(|(r, &m)| if m > 0.0 { r.iter().map(|p| p / m).collect() } else { vec![0.0; cols] })
            .collect();
        let sampler = WeightedIndex::new(&flat).map_err(|e| SourceError::BadParameter(e.to_string()))?;
        Ok(Self { joint, marginal1, marginal2, conditional, sampler })
    }

    /// Pair of `n`-bit blocks: `W1` uniform, `W2 = W1 XOR N` with `N` i.i.d. Bernoulli(`flip`) bits.
    pub fn xor_blocks(bits: u32, flip: f64) -> Result<Self, SourceError> {
        if !(1..=12).contains(&bits) || !(0.0..=1.0).contains(&flip) {
            return Err(SourceError::BadParameter(format!("xor_blocks(bits={bits}, flip={flip})")));
        }
        let m = 1usize << bits;
        let joint = (0..m)
            .map(|w1| {
                (0..m)
                    .map(|w2| {
                        let d = ((w1 ^ w2) as u32).count_ones() as i32;
                        flip.powi(d) * (1.0 - flip).powi(bits as i32 - d) / m as f64
                    })
                    .collect()
            })
            .collect();
        Self::new(joint)
    }

    pub fn joint(&self) -> &[Vec<f64>] {
        &self.joint
    }

    pub fn marginal1(&self) -> &[f64] {
        &self.marginal1
    }

    pub fn marginal2(&self) -> &[f64] {
        &self.marginal2
    }

    /// `π(·|w1)`; all zeros when `π(w1) = 0`.
    pub fn conditional_row(&self, w1: usize) -> &[f64] {
        &self.conditional[w1]
    }

    pub fn sizes(&self) -> (usize, usize) {
        (self.marginal1.len(), self.marginal2.len())
    }

    pub fn sample_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, usize) {
        let k = self.sampler.sample(rng);
        let cols = self.marginal2.len();
        (k / cols, k % cols)
    }
}

/// `(H(W1), H(W2|W1), H(W1,W2))` in bits.
pub fn conditional_entropy(pair: &CorrelatedPairSource) -> (f64, f64, f64) {
    let h1 = entropy(pair.marginal1());
    let h_joint = entropy(&pair.joint().iter().flatten().copied().collect::<Vec<_>>());
    let h2_given_1 = pair
        .marginal1()
        .iter()
        .enumerate()
        .filter(|(_, &m)| m > 0.0)
        .map(|(w1, &m)| m * entropy(pair.conditional_row(w1)))
        .sum();
    (h1, h2_given_1, h_joint)
}

/// `n·h(flip)`: conditional entropy of [`CorrelatedPairSource::xor_blocks`].
pub fn xor_blocks_conditional_entropy(bits: u32, flip: f64) -> f64 {
    bits as f64 * binary_entropy(flip)
}

/// Source description in experiment configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceSpec {
    Uniform {
        #[serde(rename = "M")]
        m: usize,
    },
    Weighted {
        probs: Vec<f64>,
    },
    Zipf {
        #[serde(rename = "M")]
        m: usize,
        exponent: f64,
    },
    Iid {
        gamma: Vec<f64>,
        #[serde(rename = "L")]
        block_len: usize,
    },
    Pair {
        joint: Vec<Vec<f64>>,
    },
    XorPair {
        bits: u32,
        flip: f64,
    },
}

/// Built source.
#[derive(Clone, Debug)]
pub enum SourceModel {
    Messages(MessageSource),
    Blocks(IidSymbolSource),
    Pair(CorrelatedPairSource),
}

impl SourceSpec {
    pub fn build(&self) -> Result<SourceModel, SourceError> {
        Ok(match self {
            SourceSpec::Uniform { m } => SourceModel::Messages(MessageSource::uniform(*m)?),
            SourceSpec::Weighted { probs } => SourceModel::Messages(MessageSource::new(probs.clone())?),
            SourceSpec::Zipf { m, exponent } => SourceModel::Messages(MessageSource::zipf(*m, *exponent)?),
            SourceSpec::Iid { gamma, block_len } => SourceModel::Blocks(IidSymbolSource::new(gamma.clone(), *block_len)?),
            SourceSpec::Pair { joint } => SourceModel::Pair(CorrelatedPairSource::new(joint.clone())?),
            SourceSpec::XorPair { bits, flip } => SourceModel::Pair(CorrelatedPairSource::xor_blocks(*bits, *flip)?),
        })
    }
}

impl SourceModel {
    /// Number of messages carried by one channel transmission (first message for pairs);
    /// `None` for block sources too large to index.
    pub fn message_count(&self) -> Option<usize> {
        match self {
            SourceModel::Messages(s) => Some(s.message_count()),
            SourceModel::Blocks(s) => s.message_count(),
            SourceModel::Pair(p) => Some(p.sizes().0),
        }
    }

    pub fn entropy_bits(&self) -> f64 {
        match self {
            SourceModel::Messages(s) => s.entropy_bits(),
            SourceModel::Blocks(s) => s.entropy_bits(),
            SourceModel::Pair(p) => conditional_entropy(p).2,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn point_mass_always_first() {
        let mut probs = vec![0.0; 5];
        probs[0] = 1.0;
        let src = MessageSource::new(probs).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!((0..1000).all(|_| src.sample_message(&mut rng) == 0));
        assert_eq!(src.entropy_bits(), 0.0);
    }

    #[test]
    fn uniform_frequencies_and_entropy() {
        let src = MessageSource::uniform(8).unwrap();
        assert!((src.entropy_bits() - 3.0).abs() < 1e-12);
        assert!((src.per_bit_entropy() - 1.0).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut counts = [0usize; 8];
        for _ in 0..100_000 {
            counts[src.sample_message(&mut rng)] += 1;
        }
        for c in counts {
            assert!((c as f64 / 1e5 - 0.125).abs() < 0.004);
        }
    }

    #[test]
    fn empirical_entropy_converges() {
        let src = MessageSource::zipf(16, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 1_000_000;
        let mut counts = [0usize; 16];
        for _ in 0..n {
            counts[src.sample_message(&mut rng)] += 1;
        }
        let freq: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
        assert!((entropy(&freq) - src.entropy_bits()).abs() < 0.01);
    }

    #[test]
    fn validation() {
        assert!(matches!(MessageSource::new(vec![0.5, 0.6]), Err(SourceError::NotNormalized(_))));
        assert!(matches!(MessageSource::new(vec![1.5, -0.5]), Err(SourceError::BadProbability(_))));
        let big = IidSymbolSource::new(vec![0.5, 0.5], 64).unwrap();
        assert_eq!(big.message_count(), None);
        assert!(matches!(big.decode_index(0), Err(SourceError::TooLarge { .. })));
        assert!(IidSymbolSource::new(vec![0.5, 0.5], 0).is_err());
        assert!(CorrelatedPairSource::new(vec![vec![0.5], vec![0.25, 0.25]]).is_err());
    }

    #[test]
    fn universal_probability_examples() {
        assert!((universal_source_log_prob(&[0], 2).unwrap() - 0.5f64.log2()).abs() < 1e-12);
        assert!((universal_source_log_prob(&[0, 0], 2).unwrap() - (3.0f64 / 8.0).log2()).abs() < 1e-12);
        let a = universal_source_log_prob(&[0, 0, 1, 1], 2).unwrap();
        let b = universal_source_log_prob(&[0, 1, 0, 1], 2).unwrap();
        assert!((a - b).abs() < 1e-12);
        assert!(matches!(universal_source_log_prob(&[2], 2), Err(SourceError::SymbolOutOfRange { .. })));
    }

    #[test]
    fn universal_threshold_examples() {
        assert!((universal_thresholds(&[1], 2, 0.5).unwrap() - 2.0).abs() < 1e-12);
        let l = 40;
        let zeros = vec![0; l];
        let product: f64 = (0..l).map(|k| (k as f64 + 0.5) / (k as f64 + 1.0)).product();
        let eps = 0.01;
        assert!((universal_thresholds(&zeros, 2, eps).unwrap() - (-eps.log2() - product.log2())).abs() < 1e-9);
        assert!(matches!(universal_thresholds(&[0], 2, 0.0), Err(SourceError::BadEpsilon(_))));
    }

    #[test]
    fn universal_probabilities_sum_to_one() {
        for l in 1..=10 {
            let src = IidSymbolSource::new(vec![0.5, 0.5], l).unwrap();
            let total: f64 = (0..src.message_count().unwrap())
                .map(|w| universal_source_log_prob(&src.decode_index(w).unwrap(), 2).unwrap().exp2())
                .sum();
            assert!((total - 1.0).abs() < 1e-12, "L={l}");
        }
        let src = IidSymbolSource::new(vec![0.2, 0.3, 0.5], 5).unwrap();
        let total: f64 = (0..src.message_count().unwrap())
            .map(|w| universal_source_log_prob(&src.decode_index(w).unwrap(), 3).unwrap().exp2())
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn expected_threshold_band() {
        // E{a} - (-log2 ε + H) is the expected mixture redundancy; subtracting the exact
        // log π_γ(s) per draw keeps the mean and removes most of the variance.
        let l = 1024;
        let src = IidSymbolSource::new(vec![0.3, 0.7], l).unwrap();
        let eps = 2f64.powi(-4);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 4000;
        let mut sum = 0.0;
        let mut sq = 0.0;
        for _ in 0..n {
            let block = src.sample_block(&mut rng);
            let a = universal_thresholds(&block, 2, eps).unwrap();
            let excess = a + eps.log2() + src.log_prob(&block);
            sum += excess;
            sq += excess * excess;
        }
        let mean = sum / n as f64;
        let se = ((sq / n as f64 - mean * mean) / n as f64).sqrt();
        let base = 0.5 * (l as f64 / (2.0 * std::f64::consts::PI * std::f64::consts::E)).log2();
        let c = mean - base;
        assert!(c >= -3.0 * se && c <= 2.0 + 3.0 * se, "c = {c} ± {se}");
    }

    #[test]
    fn mixed_radix_roundtrip() {
        let src = IidSymbolSource::new(vec![0.2, 0.3, 0.5], 4).unwrap();
        assert_eq!(src.message_count(), Some(81));
        assert_eq!(src.encode_block(&[0, 0, 1, 2]).unwrap(), 5);
        for w in 0..81 {
            assert_eq!(src.encode_block(&src.decode_index(w).unwrap()).unwrap(), w);
        }
        let total: f64 = src.message_probs().unwrap().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!((src.entropy_bits() - 4.0 * entropy(&[0.2, 0.3, 0.5])).abs() < 1e-12);
    }

    #[test]
    fn conditional_entropy_examples() {
        let same = CorrelatedPairSource::new(vec![vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        let (h1, h21, hj) = conditional_entropy(&same);
        assert_eq!((h1, h21, hj), (1.0, 0.0, 1.0));
        let indep = CorrelatedPairSource::new(vec![vec![0.25; 2]; 2]).unwrap();
        assert_eq!(conditional_entropy(&indep), (1.0, 1.0, 2.0));
        let corr = CorrelatedPairSource::new(vec![vec![0.4, 0.1], vec![0.1, 0.4]]).unwrap();
        assert!((conditional_entropy(&corr).1 - 0.721_928_094_887_362_3).abs() < 1e-12);
        let xor = CorrelatedPairSource::xor_blocks(6, 0.2).unwrap();
        let (h1, h21, _) = conditional_entropy(&xor);
        assert!((h1 - 6.0).abs() < 1e-12);
        assert!((h21 - xor_blocks_conditional_entropy(6, 0.2)).abs() < 1e-10);
    }

    #[test]
    fn pair_sampling_matches_joint() {
        let pair = CorrelatedPairSource::new(vec![vec![0.4, 0.1], vec![0.2, 0.3]]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 200_000;
        let mut counts = [[0usize; 2]; 2];
        for _ in 0..n {
            let (a, b) = pair.sample_pair(&mut rng);
            counts[a][b] += 1;
        }
        for (i, row) in pair.joint().iter().enumerate() {
            for (j, &p) in row.iter().enumerate() {
                assert!((counts[i][j] as f64 / n as f64 - p).abs() < 0.005);
            }
        }
    }

    #[test]
    fn spec_parses() {
        let s: SourceSpec = serde_json::from_str(r#"{"type":"iid","gamma":[0.3,0.7],"L":12}"#).unwrap();
        assert_eq!(s.build().unwrap().message_count(), Some(4096));
        let s: SourceSpec = serde_json::from_str(r#"{"type":"uniform","M":16}"#).unwrap();
        assert!((s.build().unwrap().entropy_bits() - 4.0).abs() < 1e-12);
        let s: SourceSpec = serde_json::from_str(r#"{"type":"pair","joint":[[0.5,0],[0,0.5]]}"#).unwrap();
        assert_eq!(s.build().unwrap().message_count(), Some(2));
        assert!(serde_json::from_str::<SourceSpec>(r#"{"type":"markov"}"#).is_err());
    }

    proptest! {
        #[test]
        fn chain_rule(raw in proptest::collection::vec(0.0f64..1.0, 12)) {
            let total: f64 = raw.iter().sum();
            prop_assume!(total > 1e-6);
            let joint: Vec<Vec<f64>> = raw.chunks(4).map(|r| r.iter().map(|v| v / total).collect()).collect();
            let pair = CorrelatedPairSource::new(joint).unwrap();
            let (h1, h21, hj) = conditional_entropy(&pair);
            prop_assert!((hj - (h1 + h21)).abs() < 1e-10);
        }

        #[test]
        fn thresholds_at_least_minus_log_eps(block in proptest::collection::vec(0usize..3, 1..40), eps in 1e-6f64..0.99) {
            prop_assert!(universal_thresholds(&block, 3, eps).unwrap() >= -eps.log2());
        }
    }
}
