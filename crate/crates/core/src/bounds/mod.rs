//! Closed-form rate, stopping-time, exponent and converse bounds.
//!
//! Message-set size is passed as `log_m = log2 M` so that sweeps can reach
//! sizes like `2^200`. All evaluators are generic over [`Real`]; use
//! [`ExtendedFloat`](crate::ExtendedFloat) when differences of nearly equal
//! rates matter.

mod sweep;

pub use sweep::{evaluate, BoundFormula, BoundParams, Precision, Scale, SimulateOptions, SweepAxis, SweepSpec, SweepTable};

use thiserror::Error;

use crate::channel::Dmc;
use crate::mixture::redundancy_constants;
use crate::scalar::{kl_divergence, Real};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("capacity must be positive and finite, got {0}")]
    BadCapacity(f64),
    #[error("need log2 M >= 1 (M >= 2), got {0}")]
    BadMessageCount(f64),
    #[error("epsilon = {0} outside its allowed range")]
    BadEpsilon(f64),
    #[error("(1 - epsilon) log2 M = {0} must exceed 1")]
    DegenerateRegime(f64),
    #[error("log2 M * ln 2 = {available} must exceed |X||Y|/2 = {needed}")]
    MessageSetTooSmall { available: f64, needed: f64 },
    #[error("delta = {delta} must lie in (0, epsilon = {epsilon})")]
    BadDelta { delta: f64, epsilon: f64 },
    #[error("feedback period must be >= 1, got {0}")]
    BadPeriod(f64),
    #[error("block length {block_len} with alphabet {alphabet} does not give log2 M = {log_m}")]
    InconsistentBlockLength { block_len: f64, alphabet: usize, log_m: f64 },
    #[error("entropy must be finite and nonnegative, got {0}")]
    BadEntropy(f64),
    #[error("rate {rate} outside [0, C = {capacity}]")]
    BadRate { rate: f64, capacity: f64 },
    #[error("alphabet sizes |X| = {x_size}, |Y| = {y_size} invalid")]
    BadAlphabet { x_size: usize, y_size: usize },
    #[error("alpha = {0} must lie in [0, 1)")]
    BadAlpha(f64),
    #[error("missing parameter `{0}`")]
    MissingParameter(&'static str),
    #[error("unknown sweep variable `{0}`")]
    UnknownVariable(String),
    #[error("invalid sweep axis: {0}")]
    BadAxis(String),
}

pub type Result<T> = std::result::Result<T, BoundsError>;

fn f<T: Real>(v: T) -> f64 {
    v.to_f64_lossy()
}

fn check_capacity<T: Real>(c: T) -> Result<()> {
    if c > T::zero() && c.is_finite() {
        Ok(())
    } else {
        Err(BoundsError::BadCapacity(f(c)))
    }
}

fn check_log_m<T: Real>(log_m: T) -> Result<()> {
    if log_m >= T::one() && log_m.is_finite() {
        Ok(())
    } else {
        Err(BoundsError::BadMessageCount(f(log_m)))
    }
}

fn check_epsilon<T: Real>(eps: T) -> Result<()> {
    if eps > T::zero() && eps < T::one() {
        Ok(())
    } else {
        Err(BoundsError::BadEpsilon(f(eps)))
    }
}

fn check_entropy<T: Real>(h: T) -> Result<()> {
    if h >= T::zero() && h.is_finite() {
        Ok(())
    } else {
        Err(BoundsError::BadEntropy(f(h)))
    }
}

fn standard<T: Real>(c: T, log_m: T, eps: T) -> Result<()> {
    check_capacity(c)?;
    check_log_m(log_m)?;
    check_epsilon(eps)
}

/// Expected stopping time bound of the known-channel decoder, `(log2 M - log2 ε + C)/C`.
pub fn expected_time_known<T: Real>(c: T, log_m: T, eps: T) -> Result<T> {
    standard(c, log_m, eps)?;
    Ok((log_m - eps.log2() + c) / c)
}

/// Achievable effective rate with a known channel: `C / (1 + (C - log2 ε)/log2 M)`.
pub fn rate_known<T: Real>(c: T, log_m: T, eps: T) -> Result<T> {
    standard(c, log_m, eps)?;
    Ok(c / (T::one() + (c - eps.log2()) / log_m))
}

/// Known-channel rate with randomized early termination at the best `δ = min(ε, 1/log2 M)`.
pub fn rate_known_randomized<T: Real>(c: T, log_m: T, eps: T) -> Result<T> {
    standard(c, log_m, eps)?;
    let inv = T::one() / log_m;
    if eps <= inv {
        return rate_known(c, log_m, eps);
    }
    let base = (T::one() - inv) / (T::one() + (c + log_m.log2()) / log_m);
    Ok(base * c / (T::one() - eps))
}

/// `E(R) = C - R - C·R/log2 M`; negative values mean the rate is not supported.
pub fn error_exponent_known<T: Real>(c: T, rate: T, log_m: T) -> Result<T> {
    check_capacity(c)?;
    check_log_m(log_m)?;
    if rate < T::zero() || !rate.is_finite() {
        return Err(BoundsError::BadRate { rate: f(rate), capacity: f(c) });
    }
    Ok(c - rate - c * rate / log_m)
}

/// Upper bound on any rate with error at most `ε`:
/// `(C/(1-ε))·(1 + 1/((1-ε)·log2 M - 1))`. Accepts `ε = 0`.
pub fn converse_rate<T: Real>(c: T, log_m: T, eps: T) -> Result<T> {
    check_capacity(c)?;
    check_log_m(log_m)?;
    if !(eps >= T::zero() && eps < T::one()) {
        return Err(BoundsError::BadEpsilon(f(eps)));
    }
    let margin = (T::one() - eps) * log_m;
    if margin <= T::one() {
        return Err(BoundsError::DegenerateRegime(f(margin)));
    }
    Ok(c / (T::one() - eps) * (T::one() + T::one() / (margin - T::one())))
}

/// Burnashev's constant and exponent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BurnashevResult {
    /// `max_{x,x'} D(p(·|x) || p(·|x'))` in bits; `+inf` when some row is not
    /// absolutely continuous w.r.t. another.
    pub c1: f64,
    pub exponent: f64,
    pub infinite: bool,
}

/// Largest KL divergence between two rows of the channel matrix.
pub fn burnashev_c1(dmc: &Dmc) -> f64 {
    let rows = dmc.forward();
    let mut best = 0.0f64;
    for (i, p) in rows.iter().enumerate() {
        for (j, q) in rows.iter().enumerate() {
            if i != j {
                best = best.max(kl_divergence(p, q));
            }
        }
    }
    best
}

/// `C₁·(1 - R/C)` for `0 <= R <= C`.
pub fn burnashev_exponent(dmc: &Dmc, capacity: f64, rate: f64) -> Result<BurnashevResult> {
    check_capacity(capacity)?;
    if !(0.0..=capacity).contains(&rate) {
        return Err(BoundsError::BadRate { rate, capacity });
    }
    let c1 = burnashev_c1(dmc);
    let slack = 1.0 - rate / capacity;
    let exponent = if slack == 0.0 { 0.0 } else { c1 * slack };
    Ok(BurnashevResult { c1, exponent, infinite: c1.is_infinite() })
}

fn loose_and_beta<T: Real>(x_size: usize, y_size: usize) -> Result<(T, T)> {
    let rc = redundancy_constants::<T>(x_size, y_size).map_err(|_| BoundsError::BadAlphabet { x_size, y_size })?;
    Ok((rc.loose_coeff, rc.beta))
}

/// Shared pieces of the unknown-channel bounds: the deflation factor
/// `1 - (|X||Y|/2)/(log2 M ln 2)` and the excess
/// `C + β + (|X||Y|/2)(log2 log2 M - log2 C - 1/ln 2)`.
fn universal_terms<T: Real>(c: T, log_m: T, x_size: usize, y_size: usize) -> Result<(T, T)> {
    let (loose, beta) = loose_and_beta::<T>(x_size, y_size)?;
    let available = log_m * T::LN_2();
    if available <= loose {
        return Err(BoundsError::MessageSetTooSmall { available: f(available), needed: f(loose) });
    }
    let deflation = T::one() - loose / available;
    let inv_ln2 = T::one() / T::LN_2();
    let excess = c + beta + loose * (log_m.log2() - c.log2() - inv_ln2);
    Ok((deflation, excess))
}

/// Achievable effective rate with an unknown channel (universal decoder).
pub fn rate_universal<T: Real>(c: T, log_m: T, eps: T, x_size: usize, y_size: usize) -> Result<T> {
    standard(c, log_m, eps)?;
    let (deflation, excess) = universal_terms(c, log_m, x_size, y_size)?;
    Ok(c * deflation / (T::one() + (excess - eps.log2()) / log_m))
}

/// Expected stopping time bound of the universal decoder with threshold `a = log2 M - log2 ε`.
pub fn expected_time_universal<T: Real>(c: T, log_m: T, eps: T, x_size: usize, y_size: usize) -> Result<T> {
    standard(c, log_m, eps)?;
    let (deflation, excess) = universal_terms(c, log_m, x_size, y_size)?;
    Ok((log_m - eps.log2() + excess) / (c * deflation))
}

/// Universal rate with randomized termination at `δ < ε`.
pub fn rate_universal_randomized<T: Real>(
    c: T,
    log_m: T,
    eps: T,
    delta: T,
    x_size: usize,
    y_size: usize,
) -> Result<T> {
    standard(c, log_m, eps)?;
    if !(delta > T::zero() && delta < eps) {
        return Err(BoundsError::BadDelta { delta: f(delta), epsilon: f(eps) });
    }
    Ok(rate_universal(c, log_m, delta, x_size, y_size)? * (T::one() - delta) / (T::one() - eps))
}

/// Maximizes [`rate_universal_randomized`] over `δ ∈ (0, ε)`; returns `(δ*, rate)`.
///
/// Log-spaced grid followed by golden-section refinement around the best cell.
pub fn optimize_universal_delta(c: f64, log_m: f64, eps: f64, x_size: usize, y_size: usize) -> Result<(f64, f64)> {
    standard(c, log_m, eps)?;
    let eval = |d: f64| rate_universal_randomized(c, log_m, eps, d, x_size, y_size);
    let lo = eps * 1e-12;
    let n = 400;
    let grid: Vec<f64> = (0..n).map(|i| lo * (eps / lo).powf((i as f64 + 0.5) / n as f64)).collect();
    let mut best = (grid[0], eval(grid[0])?);
    let mut best_i = 0;
    for (i, &d) in grid.iter().enumerate().skip(1) {
        let r = eval(d)?;
        if r > best.1 {
            best = (d, r);
            best_i = i;
        }
    }
    let (mut a, mut b) = (
        if best_i == 0 { lo } else { grid[best_i - 1] },
        if best_i + 1 == n { eps * (1.0 - 1e-12) } else { grid[best_i + 1] },
    );
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let x1 = b - g * (b - a);
        let x2 = a + g * (b - a);
        if eval(x1)? >= eval(x2)? {
            b = x2;
        } else {
            a = x1;
        }
    }
    let mid = 0.5 * (a + b);
    let r = eval(mid)?;
    if r > best.1 {
        best = (mid, r);
    }
    Ok(best)
}

/// Rate when feedback is only available every `s` symbols:
/// `C / (1 + ((s-1)C - log2 ε)/log2 M)`.
pub fn rate_limited_feedback<T: Real>(c: T, log_m: T, eps: T, period: T) -> Result<T> {
    standard(c, log_m, eps)?;
    if !(period >= T::one() && period.is_finite()) {
        return Err(BoundsError::BadPeriod(f(period)));
    }
    Ok(c / (T::one() + ((period - T::one()) * c - eps.log2()) / log_m))
}

/// Expected transmission time for a source of entropy `H` bits: `(H - log2 ε + C)/C`.
pub fn joint_sc_expected_time<T: Real>(entropy_bits: T, c: T, eps: T) -> Result<T> {
    check_entropy(entropy_bits)?;
    check_capacity(c)?;
    check_epsilon(eps)?;
    Ok((entropy_bits - eps.log2() + c) / c)
}

/// Source bits per channel use with a known source and channel: `C / (𝓗 + (C - log2 ε)/log2 M)`.
pub fn joint_sc_rate<T: Real>(c: T, log_m: T, eps: T, per_bit_entropy: T) -> Result<T> {
    standard(c, log_m, eps)?;
    check_entropy(per_bit_entropy)?;
    Ok(c / (per_bit_entropy + (c - eps.log2()) / log_m))
}

/// Source bits per channel use for a known source over an unknown channel.
pub fn rate_joint_universal<T: Real>(
    c: T,
    log_m: T,
    eps: T,
    per_bit_entropy: T,
    x_size: usize,
    y_size: usize,
) -> Result<T> {
    standard(c, log_m, eps)?;
    check_entropy(per_bit_entropy)?;
    let (deflation, excess) = universal_terms(c, log_m, x_size, y_size)?;
    Ok(c * deflation / (per_bit_entropy + (excess - eps.log2()) / log_m))
}

/// Corner-point bounds on the expected transmission times (bits over a noiseless binary link).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlepianWolfRates<T> {
    pub r1: T,
    pub r2: T,
    pub sum: T,
}

/// `R1 <= H1 - log2(ε/2) + 1`, `R2 <= H(W2|W1) - log2(ε/2) + 1`, and their sum.
pub fn slepian_wolf_rates<T: Real>(h1: T, h2_given_1: T, eps: T) -> Result<SlepianWolfRates<T>> {
    check_entropy(h1)?;
    check_entropy(h2_given_1)?;
    check_epsilon(eps)?;
    let excess = T::one() - (eps / T::lit(2.0)).log2();
    let r1 = h1 + excess;
    let r2 = h2_given_1 + excess;
    Ok(SlepianWolfRates { r1, r2, sum: r1 + r2 })
}

/// Per-bit entropy seen by a decoder that thresholds with the Jeffreys source mixture:
/// `𝓗 + ((|S|-1)/2·log2(L/(2πe)) + residual)/log2 M`.
///
/// `residual` is the unspecified bounded term of the mixture's expected code length;
/// `0` gives the lower estimate.
pub fn empirical_per_bit_entropy<T: Real>(
    per_bit_entropy: T,
    log_m: T,
    source_alphabet: usize,
    block_len: T,
    residual: T,
) -> Result<T> {
    check_entropy(per_bit_entropy)?;
    check_log_m(log_m)?;
    if source_alphabet < 2 {
        return Err(BoundsError::BadAlphabet { x_size: source_alphabet, y_size: 1 });
    }
    let s = T::from_usize_lossy(source_alphabet);
    let implied = block_len * s.log2();
    if !(block_len >= T::one()) || (implied - log_m).abs() > T::lit(1e-9) * log_m {
        return Err(BoundsError::InconsistentBlockLength {
            block_len: f(block_len),
            alphabet: source_alphabet,
            log_m: f(log_m),
        });
    }
    let two_pi_e = T::lit(2.0) * T::PI() * T::E();
    let penalty = (s - T::one()) / T::lit(2.0) * (block_len / two_pi_e).log2();
    Ok(per_bit_entropy + (penalty + residual) / log_m)
}

/// Source bits per channel use when neither source nor channel statistics are known
/// to the decoder. See [`empirical_per_bit_entropy`] for `residual`.
#[allow(clippy::too_many_arguments)]
pub fn rate_complete_universal<T: Real>(
    c: T,
    log_m: T,
    eps: T,
    x_size: usize,
    y_size: usize,
    per_bit_entropy: T,
    source_alphabet: usize,
    block_len: T,
    residual: T,
) -> Result<T> {
    standard(c, log_m, eps)?;
    let h_hat = empirical_per_bit_entropy(per_bit_entropy, log_m, source_alphabet, block_len, residual)?;
    let (deflation, excess) = universal_terms(c, log_m, x_size, y_size)?;
    Ok(c * deflation / (h_hat + (excess - eps.log2()) / log_m))
}

/// Right-hand side of the universal stopping condition at time `t`:
/// `a + (|X||Y|/2)·log2 t + β`. Once the true codeword's known-channel score
/// exceeds this value, the universal decoder has already stopped.
pub fn universal_dominance_threshold<T: Real>(a: T, t: u64, x_size: usize, y_size: usize) -> Result<T> {
    let (loose, beta) = loose_and_beta::<T>(x_size, y_size)?;
    let t = T::from_u64(t.max(1)).expect("t representable");
    Ok(a + loose * t.log2() + beta)
}

/// Effect of terminating at `t = 0` with probability `alpha`: `(E[T'], ε')`.
pub fn randomized_transform<T: Real>(expected_time: T, eps: T, alpha: T) -> Result<(T, T)> {
    if !(alpha >= T::zero() && alpha < T::one()) {
        return Err(BoundsError::BadAlpha(f(alpha)));
    }
    Ok(((T::one() - alpha) * expected_time, alpha + eps - alpha * eps))
}

#[cfg(test)]
mod tests;
