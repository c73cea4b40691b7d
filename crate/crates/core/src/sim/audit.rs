use serde::{Deserialize, Serialize};

use super::{stream_rng, Interval, Result, SimError, Stream, Z99};
use crate::channel::{Dmc, InputPrior};
use crate::scalar::CompensatedSum;
use crate::sequential::LogRatioTable;

/// Monte Carlo summary of one stopped likelihood-ratio product.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditStat {
    pub mean: f64,
    pub std_error: f64,
    pub ci99: Interval,
    /// Fraction of paths whose product reached `A` within the horizon.
    pub crossing_fraction: f64,
    /// Binomial standard deviation of that fraction at the bound `1/A`.
    pub crossing_sigma: f64,
    pub crossing_bound: f64,
}

impl AuditStat {
    pub fn mean_consistent(&self) -> bool {
        self.ci99.contains(1.0)
    }

    pub fn crossing_ok(&self) -> bool {
        self.crossing_fraction <= self.crossing_bound + 3.0 * self.crossing_sigma
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MartingaleAudit {
    pub horizon: usize,
    pub samples: usize,
    pub log2_a: f64,
    pub known: AuditStat,
    pub universal: AuditStat,
}

struct Acc {
    sum: CompensatedSum,
    sum_sq: CompensatedSum,
    crossed: u64,
}

impl Acc {
    fn new() -> Self {
        Self { sum: CompensatedSum::new(), sum_sq: CompensatedSum::new(), crossed: 0 }
    }

    fn push(&mut self, log2_value: f64, crossed: bool) {
        let v = log2_value.exp2();
        self.sum.add(v);
        self.sum_sq.add(v * v);
        self.crossed += u64::from(crossed);
    }

    fn finish(&self, n: usize, log2_a: f64) -> AuditStat {
        let n_f = n as f64;
        let mean = self.sum.value() / n_f;
        let var = if n > 1 { ((self.sum_sq.value() - n_f * mean * mean) / (n_f - 1.0)).max(0.0) } else { 0.0 };
        let std_error = (var / n_f).sqrt();
        let bound = (-log2_a).exp2();
        AuditStat {
            mean,
            std_error,
            ci99: Interval { lo: mean - Z99 * std_error, hi: mean + Z99 * std_error },
            crossing_fraction: self.crossed as f64 / n_f,
            crossing_sigma: (bound * (1.0 - bound) / n_f).sqrt(),
            crossing_bound: bound,
        }
    }
}

/// Stopped products of the known-channel ratio `θ(x|y)/q(x)` and of the
/// universal ratio `p_U(x^t|y^t)/q(x^t)` along paths where the codeword `x`
/// is independent of the outputs `y`. Each path freezes once its log2 product
/// reaches `log2_a`, so both means equal 1 and crossings are at most `2^-log2_a`.
pub fn martingale_audit(
    dmc: &Dmc,
    prior: &InputPrior,
    horizon: usize,
    samples: usize,
    log2_a: f64,
    seed: u64,
) -> Result<MartingaleAudit> {
    if horizon == 0 || samples == 0 {
        return Err(SimError::Config("audit needs horizon >= 1 and samples >= 1".into()));
    }
    if prior.len() != dmc.input_size() {
        return Err(SimError::Config("prior size does not match channel inputs".into()));
    }
    let table = LogRatioTable::backward(&dmc.backward_channel(prior)?, prior);
    let (nx, ny) = (dmc.input_size(), dmc.output_size());
    let log_q: Vec<f64> = prior.probs().iter().map(|p| p.log2()).collect();
    let half_x = nx as f64 / 2.0;
    let mut known = Acc::new();
    let mut universal = Acc::new();
    let mut counts = vec![0u32; nx * ny];
    let mut col = vec![0u32; ny];
    for i in 0..samples {
        let mut rng = stream_rng(seed, i as u64, Stream::Audit);
        counts.fill(0);
        col.fill(0);
        let (mut lk, mut lu) = (0.0, 0.0);
        let (mut k_stop, mut u_stop) = (false, false);
        for _ in 0..horizon {
            let x = prior.symbol_for(rand::Rng::random(&mut rng));
            let other = prior.symbol_for(rand::Rng::random(&mut rng));
            let y = dmc.sample_output(other, &mut rng)?;
            if !k_stop {
                lk += table.get(x, y);
                k_stop = lk >= log2_a;
            }
            if !u_stop {
                let p = (f64::from(counts[x * ny + y]) + 0.5) / (f64::from(col[y]) + half_x);
                lu += p.log2() - log_q[x];
                u_stop = lu >= log2_a;
            }
            counts[x * ny + y] += 1;
            col[y] += 1;
            if k_stop && u_stop {
                break;
            }
        }
        known.push(lk, k_stop);
        universal.push(lu, u_stop);
    }
    Ok(MartingaleAudit {
        horizon,
        samples,
        log2_a,
        known: known.finish(samples, log2_a),
        universal: universal.finish(samples, log2_a),
    })
}
