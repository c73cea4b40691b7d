//! Sequential threshold decoders.
//!
//! Every message keeps a running score in bits. After each channel output all
//! scores are updated, and the decoder stops the first time one or more
//! scores reach their thresholds: a single crossing is a decision, several
//! simultaneous crossings are a tie, which the caller resolves at random and
//! records as an error.

use rand::Rng;
use thiserror::Error;

use crate::channel::{log_ratio, AwgnChannel, BackwardChannel, Dmc, InputPrior};
use crate::codebook::{Codebook, GaussianCodebook, MessageKey};
use crate::mixture::{CountMatrix, KtLogTable};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SequentialError {
    #[error("epsilon = {0} must lie in (0, 1)")]
    BadEpsilon(f64),
    #[error("need at least 2 messages, got {0}")]
    BadM(usize),
    #[error("message {0} has zero probability")]
    ZeroProbabilityMessage(usize),
    #[error("probabilities sum to {0}, not 1")]
    NotNormalized(f64),
    #[error("alpha = {0} must lie in [0, 1)")]
    BadAlpha(f64),
    #[error("decision is not a tie between two or more messages")]
    NotATie,
    #[error("threshold count {thresholds} does not match message count {messages}")]
    SizeMismatch { thresholds: usize, messages: usize },
}

fn check_epsilon(epsilon: f64) -> Result<(), SequentialError> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(SequentialError::BadEpsilon(epsilon))
    }
}

/// Per-message log-thresholds `a_w` in bits. `+inf` marks a message that can never be decided.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdScheme {
    log_thresholds: Vec<f64>,
}

impl ThresholdScheme {
    /// `a_w = log2 M - log2 ε` for every message.
    pub fn equiprobable(message_count: usize, epsilon: f64) -> Result<Self, SequentialError> {
        if message_count < 2 {
            return Err(SequentialError::BadM(message_count));
        }
        check_epsilon(epsilon)?;
        let a = (message_count as f64).log2() - epsilon.log2();
        Ok(Self { log_thresholds: vec![a; message_count] })
    }

    /// `a_w = -log2 π(w) - log2 ε`.
    pub fn weighted(pi: &[f64], epsilon: f64) -> Result<Self, SequentialError> {
        check_epsilon(epsilon)?;
        check_distribution(pi)?;
        if let Some(w) = pi.iter().position(|&p| p <= 0.0) {
            return Err(SequentialError::ZeroProbabilityMessage(w));
        }
        Ok(Self { log_thresholds: pi.iter().map(|&p| -p.log2() - epsilon.log2()).collect() })
    }

    /// Like [`weighted`](Self::weighted) but zero-probability messages are excluded
    /// (infinite threshold) instead of rejected.
    pub fn on_support(pi: &[f64], epsilon: f64) -> Result<Self, SequentialError> {
        check_epsilon(epsilon)?;
        check_distribution(pi)?;
        Ok(Self {
            log_thresholds: pi
                .iter()
                .map(|&p| if p > 0.0 { -p.log2() - epsilon.log2() } else { f64::INFINITY })
                .collect(),
        })
    }

    pub fn from_log_thresholds(log_thresholds: Vec<f64>) -> Self {
        Self { log_thresholds }
    }

    pub fn len(&self) -> usize {
        self.log_thresholds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_thresholds.is_empty()
    }

    #[inline]
    pub fn get(&self, w: usize) -> f64 {
        self.log_thresholds[w]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.log_thresholds
    }
}

fn check_distribution(pi: &[f64]) -> Result<(), SequentialError> {
    if pi.len() < 2 {
        return Err(SequentialError::BadM(pi.len()));
    }
    let sum: f64 = pi.iter().sum();
    if (sum - 1.0).abs() > 1e-9 || pi.iter().any(|p| !(*p >= 0.0)) {
        return Err(SequentialError::NotNormalized(sum));
    }
    Ok(())
}

/// Thresholds for the second stage of two-stage decoding: `a(w1,w2) = -log2(ε/2) - log2 π(w2|w1)`.
pub fn side_info_thresholds(conditional_row: &[f64], epsilon: f64) -> Result<ThresholdScheme, SequentialError> {
    check_epsilon(epsilon)?;
    let mass: f64 = conditional_row.iter().sum();
    if mass <= 0.0 {
        return Err(SequentialError::ZeroProbabilityMessage(0));
    }
    ThresholdScheme::on_support(conditional_row, epsilon / 2.0)
}

/// Outcome of one decoder step.
#[derive(Clone, Debug, PartialEq)]
pub enum Decision {
    Continue,
    /// Exactly one message crossed at time `t`.
    Decide { message: usize, t: usize },
    /// Two or more messages crossed simultaneously at time `t`.
    Tie { messages: Vec<usize>, t: usize },
    /// Randomized early termination before the first symbol.
    Abort,
}

impl Decision {
    pub fn is_final(&self) -> bool {
        !matches!(self, Decision::Continue)
    }
}

/// Uniformly picks one member of a tie; the trial always counts as an error.
pub fn resolve_tie<R: Rng + ?Sized>(decision: &Decision, rng: &mut R) -> Result<(usize, bool), SequentialError> {
    match decision {
        Decision::Tie { messages, .. } if messages.len() >= 2 => {
            Ok((messages[rng.random_range(0..messages.len())], true))
        }
        _ => Err(SequentialError::NotATie),
    }
}

/// Scores `Σ_k z_{w,k}` for every message plus the list of messages still finite.
#[derive(Clone, Debug)]
pub struct KnownChannelState {
    scores: Vec<f64>,
    keys: Vec<MessageKey>,
    alive: Vec<u32>,
    crossed: Vec<usize>,
    t: usize,
}

impl KnownChannelState {
    pub fn new(keys: Vec<MessageKey>) -> Self {
        let m = keys.len();
        Self {
            scores: vec![0.0; m],
            keys,
            alive: (0..m as u32).collect(),
            crossed: Vec::new(),
            t: 0,
        }
    }

    pub fn for_codebook(cb: &Codebook) -> Self {
        Self::new((0..cb.message_count()).map(|w| cb.key(w)).collect())
    }

    pub fn for_gaussian(cb: &GaussianCodebook) -> Self {
        Self::new((0..cb.message_count()).map(|w| cb.key(w)).collect())
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn score(&self, w: usize) -> f64 {
        self.scores[w]
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// Number of messages whose score is still finite.
    pub fn alive(&self) -> usize {
        self.alive.len()
    }

    /// Adds `increment(key)` to every live score and applies the crossing rule.
    /// A score that becomes `-inf` can never recover, so that message is dropped.
    #[inline]
    fn advance<F: FnMut(MessageKey) -> f64>(&mut self, th: &ThresholdScheme, mut increment: F) -> Decision {
        self.t += 1;
        self.crossed.clear();
        let scores = &mut self.scores;
        let keys = &self.keys;
        let crossed = &mut self.crossed;
        let mut dropped = false;
        for &w in &self.alive {
            let w = w as usize;
            let s = scores[w] + increment(keys[w]);
            scores[w] = s;
            if s >= th.get(w) {
                crossed.push(w);
            } else if s == f64::NEG_INFINITY {
                dropped = true;
            }
        }
        if dropped {
            self.alive.retain(|&w| scores[w as usize] > f64::NEG_INFINITY);
        }
        match self.crossed.len() {
            0 => Decision::Continue,
            1 => Decision::Decide { message: self.crossed[0], t: self.t },
            _ => Decision::Tie { messages: self.crossed.clone(), t: self.t },
        }
    }
}

/// Flat `log2 θ(x|y) - log2 q(x)` lookup, indexed by `x * |Y| + y`.
#[derive(Clone, Debug, PartialEq)]
pub struct LogRatioTable {
    y_size: usize,
    values: Vec<f64>,
}

impl LogRatioTable {
    /// Backward-channel form used by the known-channel decoder.
    pub fn backward(bw: &BackwardChannel, prior: &InputPrior) -> Self {
        let y_size = bw.output_size();
        Self { y_size, values: bw.log_ratio_table(prior).into_iter().flatten().collect() }
    }

    /// Forward form `log2 p(y|x) - log2 p(y)`; equal to the backward form by Bayes' rule.
    pub fn forward(dmc: &Dmc, prior: &InputPrior) -> Self {
        let marginal = dmc.output_marginal(prior);
        let y_size = dmc.output_size();
        let values = (0..dmc.input_size())
            .flat_map(|x| (0..y_size).map(move |y| (x, y)))
            .map(|(x, y)| log_ratio(dmc.transition(x, y), marginal[y]))
            .collect();
        Self { y_size, values }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[x * self.y_size + y]
    }
}

/// Consumes output `y`, adding `z_{w,t} = log2 θ(c_{w,t}, y) - log2 q(c_{w,t})` to every score.
#[inline]
pub fn known_step(
    state: &mut KnownChannelState,
    y: usize,
    cb: &Codebook,
    table: &LogRatioTable,
    th: &ThresholdScheme,
) -> Decision {
    let k = state.t;
    state.advance(th, |key| table.get(cb.symbol_with_key(key, k), y))
}

/// Known-channel step for the Gaussian channel with a Gaussian codebook.
#[inline]
pub fn awgn_step(
    state: &mut KnownChannelState,
    y: f64,
    cb: &GaussianCodebook,
    channel: &AwgnChannel,
    th: &ThresholdScheme,
) -> Decision {
    let k = state.t;
    state.advance(th, |key| channel.log_score(cb.symbol_with_key(key, k), y))
}

/// Second-stage step of two-stage decoding, scored with `log2 p(y|d) - log2 p(y)`.
/// Build `forward_table` with [`LogRatioTable::forward`] and thresholds with
/// [`side_info_thresholds`] for the already decided first message.
#[inline]
pub fn side_info_step(
    state: &mut KnownChannelState,
    y: usize,
    cb: &Codebook,
    forward_table: &LogRatioTable,
    th: &ThresholdScheme,
) -> Decision {
    known_step(state, y, cb, forward_table, th)
}

/// Universal decoder state: per-message pair counts, mixture log-probability
/// and codeword log-prior, stored flat for cache locality.
#[derive(Clone, Debug)]
pub struct UniversalState {
    x_size: usize,
    y_size: usize,
    keys: Vec<MessageKey>,
    counts: Vec<u32>,
    column_totals: Vec<u32>,
    mixture_log: Vec<f64>,
    codeword_log_prior: Vec<f64>,
    crossed: Vec<usize>,
    t: usize,
}

impl UniversalState {
    pub fn new(cb: &Codebook, y_size: usize) -> Self {
        let m = cb.message_count();
        let x_size = cb.prior().len();
        Self {
            x_size,
            y_size,
            keys: (0..m).map(|w| cb.key(w)).collect(),
            counts: vec![0; m * x_size * y_size],
            column_totals: vec![0; m * y_size],
            mixture_log: vec![0.0; m],
            codeword_log_prior: vec![0.0; m],
            crossed: Vec::new(),
            t: 0,
        }
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn mixture_log_prob(&self, w: usize) -> f64 {
        self.mixture_log[w]
    }

    pub fn codeword_log_prior(&self, w: usize) -> f64 {
        self.codeword_log_prior[w]
    }

    /// `log2 p_U(c_w | y^t) - log2 q(c_w)`.
    pub fn score(&self, w: usize) -> f64 {
        self.mixture_log[w] - self.codeword_log_prior[w]
    }

    pub fn count_matrix(&self, w: usize) -> CountMatrix {
        let block = self.x_size * self.y_size;
        let rows: Vec<Vec<u32>> = self.counts[w * block..(w + 1) * block]
            .chunks(self.y_size)
            .map(<[u32]>::to_vec)
            .collect();
        CountMatrix::from_rows(&rows)
    }
}

/// Precomputed `log2 q(x)` per input symbol.
pub fn log_prior_table(prior: &InputPrior) -> Vec<f64> {
    prior.probs().iter().map(|p| p.log2()).collect()
}

/// Updates each message's counts with `(c_{w,t}, y)` and tests
/// `log2 p_U(c_w|y^t) - log2 q(c_w) >= a_w`.
///
/// `kt` must cover counts up to the number of symbols that will be consumed.
pub fn universal_step(
    state: &mut UniversalState,
    y: usize,
    cb: &Codebook,
    log_prior: &[f64],
    kt: &KtLogTable,
    th: &ThresholdScheme,
) -> Decision {
    let k = state.t;
    state.t += 1;
    state.crossed.clear();
    let block = state.x_size * state.y_size;
    for w in 0..state.keys.len() {
        let c = cb.symbol_with_key(state.keys[w], k);
        let cell = w * block + c * state.y_size + y;
        let col = w * state.y_size + y;
        let n_xy = state.counts[cell];
        let n_y = state.column_totals[col];
        state.mixture_log[w] += kt.log2_kt(n_xy, n_y);
        state.codeword_log_prior[w] += log_prior[c];
        state.counts[cell] = n_xy + 1;
        state.column_totals[col] = n_y + 1;
        if state.mixture_log[w] - state.codeword_log_prior[w] >= th.get(w) {
            state.crossed.push(w);
        }
    }
    match state.crossed.len() {
        0 => Decision::Continue,
        1 => Decision::Decide { message: state.crossed[0], t: state.t },
        _ => Decision::Tie { messages: state.crossed.clone(), t: state.t },
    }
}

/// Randomized early termination: with probability `alpha` the decoder gives up
/// before the first symbol and declares an error; otherwise it runs unchanged.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Randomizer {
    alpha: f64,
}

impl Randomizer {
    pub fn new(alpha: f64) -> Result<Self, SequentialError> {
        if (0.0..1.0).contains(&alpha) {
            Ok(Self { alpha })
        } else {
            Err(SequentialError::BadAlpha(alpha))
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `Some(Decision::Abort)` with probability `alpha`; the draw is always consumed
    /// so streams stay aligned across alpha values.
    pub fn begin<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Decision> {
        let u: f64 = rng.random();
        (u < self.alpha).then_some(Decision::Abort)
    }
}
