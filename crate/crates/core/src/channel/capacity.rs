//! Alternating-maximization (Blahut-Arimoto) capacity solver.

use super::{ChannelError, Dmc, InputPrior};

pub const DEFAULT_TOLERANCE_BITS: f64 = 1e-9;
pub const DEFAULT_MAX_ITERS: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct CapacityResult {
    pub capacity_bits: f64,
    pub optimal_prior: InputPrior,
    pub iterations: usize,
    /// Upper bound on `C - capacity_bits`.
    pub gap_bound: f64,
}

/// Per-input divergence `D(p(.|x) || r)` in bits, where `r` is the output marginal.
fn row_divergences(dmc: &Dmc, marginal: &[f64]) -> Vec<f64> {
    dmc.forward()
        .iter()
        .map(|row| {
            row.iter()
                .zip(marginal)
                .filter(|(&p, _)| p > 0.0)
                .map(|(&p, &r)| p * (p / r).log2())
                .sum()
        })
        .collect()
}

/// Computes `C = max_q I(X;Y)` to within `tolerance_bits`.
///
/// Stops when `max_x D(x) - I(q) <= tolerance_bits`; the left side upper-bounds
/// the distance to capacity for any `q`.
pub fn capacity(dmc: &Dmc, tolerance_bits: f64, max_iters: usize) -> Result<CapacityResult, ChannelError> {
    if !(tolerance_bits > 0.0) {
        return Err(ChannelError::BadParameter(format!("tolerance {tolerance_bits} must be positive")));
    }
    let nx = dmc.input_size();
    let mut q = vec![1.0 / nx as f64; nx];
    let mut iterations = 0;
    loop {
        let prior = InputPrior::new(q.clone())?;
        let marginal = dmc.output_marginal(&prior);
        let d = row_divergences(dmc, &marginal);
        let info: f64 = q.iter().zip(&d).map(|(&qi, &di)| qi * di).sum();
        let upper = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let gap = (upper - info).max(0.0);
        if gap <= tolerance_bits {
            return Ok(CapacityResult {
                capacity_bits: info.max(0.0),
                optimal_prior: prior,
                iterations,
                gap_bound: gap,
            });
        }
        if iterations >= max_iters {
            return Err(ChannelError::NoConvergence { iterations, gap_bits: gap });
        }
        // q'(x) ∝ q(x) 2^{D(x)}; shift by the max exponent for stability.
        let weights: Vec<f64> = q.iter().zip(&d).map(|(&qi, &di)| qi * (di - upper).exp2()).collect();
        let total: f64 = weights.iter().sum();
        q = weights.into_iter().map(|w| w / total).collect();
        // Renormalize exactly so InputPrior validation never trips on drift.
        let s: f64 = q.iter().sum();
        q.iter_mut().for_each(|v| *v /= s);
        iterations += 1;
    }
}
