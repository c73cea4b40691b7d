//! Discrete memoryless and additive Gaussian channel models.

mod awgn;
mod capacity;
mod spec;

pub use awgn::AwgnChannel;
pub use capacity::{capacity, CapacityResult, DEFAULT_MAX_ITERS, DEFAULT_TOLERANCE_BITS};
pub use spec::{ChannelModel, ChannelSpec};

use rand::Rng;
use thiserror::Error;

use crate::scalar::{entropy, xlog2x};

/// Row sums of a transition matrix must be within this of 1.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("transition matrix is empty")]
    Empty,
    #[error("transition matrix is ragged: row {row} has {len} entries, expected {expected}")]
    Ragged { row: usize, len: usize, expected: usize },
    #[error("row {row} sums to {sum}, not 1")]
    NonStochasticRow { row: usize, sum: f64 },
    #[error("entry ({row}, {col}) = {value} is negative or not finite")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("symbol {symbol} out of range for alphabet of size {size}")]
    SymbolOutOfRange { symbol: usize, size: usize },
    #[error("invalid input prior: {0}")]
    InvalidPrior(String),
    #[error("capacity solver did not converge in {iterations} iterations (gap {gap_bits} bits)")]
    NoConvergence { iterations: usize, gap_bits: f64 },
    #[error("invalid channel parameter: {0}")]
    BadParameter(String),
}

/// A discrete memoryless channel `p(y|x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dmc {
    forward: Vec<Vec<f64>>,
    cumulative: Vec<Vec<f64>>,
}

impl Dmc {
    /// Validates a row-stochastic matrix with one row per input symbol.
    pub fn new(forward: Vec<Vec<f64>>) -> Result<Self, ChannelError> {
        let cols = forward.first().map(Vec::len).ok_or(ChannelError::Empty)?;
        if cols == 0 {
            return Err(ChannelError::Empty);
        }
        for (row, r) in forward.iter().enumerate() {
            if r.len() != cols {
                return Err(ChannelError::Ragged { row, len: r.len(), expected: cols });
            }
            for (col, &value) in r.iter().enumerate() {
                if !(value >= 0.0 && value.is_finite()) {
                    return Err(ChannelError::NegativeEntry { row, col, value });
                }
            }
            let sum: f64 = r.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(ChannelError::NonStochasticRow { row, sum });
            }
        }
        let cumulative = forward
            .iter()
            .map(|r| {
                let mut acc = 0.0;
                r.iter()
                    .map(|&p| {
                        acc += p;
                        acc
                    })
                    .collect()
            })
            .collect();
        Ok(Self { forward, cumulative })
    }

    /// Binary symmetric channel with crossover probability `p`.
    pub fn bsc(p: f64) -> Result<Self, ChannelError> {
        check_probability("p", p)?;
        Self::new(vec![vec![1.0 - p, p], vec![p, 1.0 - p]])
    }

    /// Binary erasure channel; outputs are `0`, `1` and the erasure symbol `2`.
    pub fn bec(delta: f64) -> Result<Self, ChannelError> {
        check_probability("delta", delta)?;
        Self::new(vec![vec![1.0 - delta, 0.0, delta], vec![0.0, 1.0 - delta, delta]])
    }

    /// Z-channel: input 0 is received perfectly, input 1 flips to 0 with probability `p`.
    pub fn z_channel(p: f64) -> Result<Self, ChannelError> {
        check_probability("p", p)?;
        Self::new(vec![vec![1.0, 0.0], vec![p, 1.0 - p]])
    }

    /// Identity channel over `n` symbols.
    pub fn noiseless(n: usize) -> Result<Self, ChannelError> {
        Self::new(
            (0..n)
                .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect(),
        )
    }

    pub fn input_size(&self) -> usize {
        self.forward.len()
    }

    pub fn output_size(&self) -> usize {
        self.forward[0].len()
    }

    pub fn forward(&self) -> &[Vec<f64>] {
        &self.forward
    }

    pub fn transition(&self, x: usize, y: usize) -> f64 {
        self.forward[x][y]
    }

    /// Output distribution induced by `prior`.
    pub fn output_marginal(&self, prior: &InputPrior) -> Vec<f64> {
        let mut out = vec![0.0; self.output_size()];
        for (row, &q) in self.forward.iter().zip(prior.probs()) {
            for (o, &p) in out.iter_mut().zip(row) {
                *o += q * p;
            }
        }
        out
    }

    /// Draws one channel output for input `x`.
    pub fn sample_output<R: Rng + ?Sized>(&self, x: usize, rng: &mut R) -> Result<usize, ChannelError> {
        let cdf = self
            .cumulative
            .get(x)
            .ok_or(ChannelError::SymbolOutOfRange { symbol: x, size: self.input_size() })?;
        let u: f64 = rng.random();
        Ok(invert_cdf(cdf, u))
    }

    /// Mutual information `I(X;Y)` in bits under `prior`.
    pub fn mutual_information(&self, prior: &InputPrior) -> Result<f64, ChannelError> {
        self.check_prior(prior)?;
        let marginal = self.output_marginal(prior);
        // I = H(Y) - H(Y|X)
        let h_y = entropy(&marginal);
        let h_y_given_x: f64 = self
            .forward
            .iter()
            .zip(prior.probs())
            .map(|(row, &q)| q * -row.iter().map(|&p| xlog2x(p)).sum::<f64>())
            .sum();
        Ok((h_y - h_y_given_x).max(0.0))
    }

    /// Posterior `Pr{X=i | Y=j}` under `prior`.
    pub fn backward_channel(&self, prior: &InputPrior) -> Result<BackwardChannel, ChannelError> {
        self.check_prior(prior)?;
        let nx = self.input_size();
        let ny = self.output_size();
        let marginal = self.output_marginal(prior);
        let mut posterior = vec![vec![0.0; ny]; nx];
        let mut degenerate = vec![false; ny];
        for j in 0..ny {
            if marginal[j] > 0.0 {
                for i in 0..nx {
                    posterior[i][j] = prior.probs()[i] * self.forward[i][j] / marginal[j];
                }
            } else {
                degenerate[j] = true;
                for row in posterior.iter_mut() {
                    row[j] = 1.0 / nx as f64;
                }
            }
        }
        Ok(BackwardChannel { posterior, output_marginal: marginal, degenerate })
    }

    fn check_prior(&self, prior: &InputPrior) -> Result<(), ChannelError> {
        if prior.len() != self.input_size() {
            return Err(ChannelError::InvalidPrior(format!(
                "prior has {} entries, channel has {} inputs",
                prior.len(),
                self.input_size()
            )));
        }
        Ok(())
    }
}

fn check_probability(name: &str, p: f64) -> Result<(), ChannelError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(ChannelError::BadParameter(format!("{name} = {p} is not a probability")))
    }
}

/// Smallest index whose cumulative mass exceeds `u`; falls back to the last
/// symbol with positive mass so rounding in the CDF never selects a null symbol.
pub(crate) fn invert_cdf(cdf: &[f64], u: f64) -> usize {
    match cdf.iter().position(|&c| u < c) {
        Some(i) => i,
        None => {
            let mut last = cdf.len() - 1;
            while last > 0 && cdf[last] == cdf[last - 1] {
                last -= 1;
            }
            last
        }
    }
}

/// Codebook generation distribution `q(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct InputPrior {
    probs: Vec<f64>,
    cumulative: Vec<f64>,
}

impl InputPrior {
    pub fn new(probs: Vec<f64>) -> Result<Self, ChannelError> {
        if probs.is_empty() {
            return Err(ChannelError::InvalidPrior("empty".into()));
        }
        if let Some(p) = probs.iter().find(|p| !(**p >= 0.0 && p.is_finite())) {
            return Err(ChannelError::InvalidPrior(format!("entry {p} is negative")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(ChannelError::InvalidPrior(format!("entries sum to {sum}")));
        }
        let mut acc = 0.0;
        let cumulative = probs
            .iter()
            .map(|&p| {
                acc += p;
                acc
            })
            .collect();
        Ok(Self { probs, cumulative })
    }

    pub fn uniform(n: usize) -> Self {
        Self::new(vec![1.0 / n as f64; n]).expect("uniform prior is valid")
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, x: usize) -> f64 {
        self.probs[x]
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Maps a uniform variate in `[0,1)` to a symbol.
    pub fn symbol_for(&self, u: f64) -> usize {
        invert_cdf(&self.cumulative, u)
    }
}

/// Posterior matrix `θ[i][j] = Pr{X=i | Y=j}` with the induced output law.
#[derive(Clone, Debug, PartialEq)]
pub struct BackwardChannel {
    posterior: Vec<Vec<f64>>,
    output_marginal: Vec<f64>,
    degenerate: Vec<bool>,
}

impl BackwardChannel {
    pub fn posterior(&self, x: usize, y: usize) -> f64 {
        self.posterior[x][y]
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.posterior
    }

    pub fn output_marginal(&self) -> &[f64] {
        &self.output_marginal
    }

    /// Output columns that never occur; their posterior is uniform by convention.
    pub fn is_degenerate(&self, y: usize) -> bool {
        self.degenerate[y]
    }

    pub fn input_size(&self) -> usize {
        self.posterior.len()
    }

    pub fn output_size(&self) -> usize {
        self.output_marginal.len()
    }

    /// `log2 θ(x|y) - log2 q(x)` for every `(x, y)`; `-inf` where the posterior vanishes.
    pub fn log_ratio_table(&self, prior: &InputPrior) -> Vec<Vec<f64>> {
        self.posterior
            .iter()
            .zip(prior.probs())
            .map(|(row, &q)| row.iter().map(|&th| log_ratio(th, q)).collect())
            .collect()
    }
}

/// `log2(num / den)` in the score domain: zero numerators give `-inf`.
pub(crate) fn log_ratio(num: f64, den: f64) -> f64 {
    if num <= 0.0 {
        f64::NEG_INFINITY
    } else {
        num.log2() - den.log2()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    #[test]
    fn make_dmc_examples() {
        let id = Dmc::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(id, Dmc::noiseless(2).unwrap());
        let bsc = Dmc::new(vec![vec![0.75, 0.25], vec![0.25, 0.75]]).unwrap();
        assert_eq!(bsc, Dmc::bsc(0.25).unwrap());
        assert!(matches!(
            Dmc::new(vec![vec![0.5, 0.6], vec![0.5, 0.4]]),
            Err(ChannelError::NonStochasticRow { row: 0, .. })
        ));
        assert!(matches!(
            Dmc::new(vec![vec![1.5, -0.5]]),
            Err(ChannelError::NegativeEntry { row: 0, col: 1, .. })
        ));
        assert!(matches!(Dmc::new(vec![]), Err(ChannelError::Empty)));
        assert!(matches!(
            Dmc::new(vec![vec![1.0], vec![0.5, 0.5]]),
            Err(ChannelError::Ragged { row: 1, .. })
        ));
    }

    #[test]
    fn mutual_information_examples() {
        let u2 = InputPrior::uniform(2);
        assert!((Dmc::noiseless(2).unwrap().mutual_information(&u2).unwrap() - 1.0).abs() < 1e-15);
        assert!((Dmc::bec(0.25).unwrap().mutual_information(&u2).unwrap() - 0.75).abs() < 1e-12);
        // 1 - h2(0.11) = 1 - 0.4999166 by hand
        let i = Dmc::bsc(0.11).unwrap().mutual_information(&u2).unwrap();
        assert!((i - 0.50008).abs() < 1e-4, "{i}");
    }

    #[test]
    fn backward_channel_examples() {
        let u2 = InputPrior::uniform(2);
        let bw = Dmc::noiseless(2).unwrap().backward_channel(&u2).unwrap();
        assert_eq!(bw.matrix(), &[vec![1.0, 0.0], vec![0.0, 1.0]]);

        let bw = Dmc::bsc(0.25).unwrap().backward_channel(&u2).unwrap();
        assert!((bw.posterior(0, 0) - 0.75).abs() < 1e-15);
        assert!((bw.posterior(1, 0) - 0.25).abs() < 1e-15);
        assert!((bw.posterior(0, 1) - 0.25).abs() < 1e-15);

        let bw = Dmc::bec(0.3).unwrap().backward_channel(&u2).unwrap();
        assert!((bw.posterior(0, 2) - 0.5).abs() < 1e-15);
        assert!((bw.posterior(1, 2) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_marginal_column_is_uniform_and_flagged() {
        let dmc = Dmc::z_channel(0.5).unwrap();
        let prior = InputPrior::new(vec![1.0, 0.0]).unwrap();
        let bw = dmc.backward_channel(&prior).unwrap();
        assert!(bw.is_degenerate(1));
        assert!(!bw.is_degenerate(0));
        assert_eq!(bw.posterior(0, 1), 0.5);
        assert_eq!(bw.posterior(0, 0), 1.0);
    }

    #[test]
    fn sample_output_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let id = Dmc::noiseless(2).unwrap();
        for _ in 0..100 {
            assert_eq!(id.sample_output(1, &mut rng).unwrap(), 1);
        }
        let clean = Dmc::bsc(0.0).unwrap();
        for _ in 0..100 {
            assert_eq!(clean.sample_output(0, &mut rng).unwrap(), 0);
        }
        assert!(matches!(id.sample_output(2, &mut rng), Err(ChannelError::SymbolOutOfRange { .. })));

        let bsc = Dmc::bsc(0.25).unwrap();
        let n = 1_000_000;
        let flips = (0..n).filter(|_| bsc.sample_output(0, &mut rng).unwrap() == 1).count();
        assert!((flips as f64 / n as f64 - 0.25).abs() < 0.002);
    }

    #[test]
    fn sample_output_chi_square() {
        let dmc = Dmc::new(vec![vec![0.2, 0.5, 0.3], vec![0.6, 0.1, 0.3]]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let critical = ChiSquared::new(2.0).unwrap().inverse_cdf(1.0 - 1e-3);
        for x in 0..2 {
            let mut counts = [0usize; 3];
            for _ in 0..n {
                counts[dmc.sample_output(x, &mut rng).unwrap()] += 1;
            }
            let stat: f64 = counts
                .iter()
                .zip(&dmc.forward()[x])
                .map(|(&o, &p)| {
                    let e = p * n as f64;
                    (o as f64 - e).powi(2) / e
                })
                .sum();
            assert!(stat < critical, "row {x}: chi2 {stat} >= {critical}");
        }
    }

    #[test]
    fn joint_factors_both_ways() {
        let dmc = Dmc::new(vec![vec![0.7, 0.2, 0.1], vec![0.1, 0.3, 0.6], vec![0.0, 0.5, 0.5]]).unwrap();
        let prior = InputPrior::new(vec![0.5, 0.3, 0.2]).unwrap();
        let bw = dmc.backward_channel(&prior).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let lhs = prior.prob(i) * dmc.transition(i, j);
                let rhs = bw.output_marginal()[j] * bw.posterior(i, j);
                assert!((lhs - rhs).abs() < 1e-12);
            }
        }
        for j in 0..3 {
            let col: f64 = (0..3).map(|i| bw.posterior(i, j)).sum();
            assert!((col - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn invert_cdf_never_picks_null_tail() {
        let prior = InputPrior::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(prior.symbol_for(0.999_999_999_999), 0);
        assert_eq!(invert_cdf(&[0.5, 0.9, 0.9], 0.95), 1);
    }
}
