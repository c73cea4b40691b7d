//! Monte Carlo engine: full encode, channel, and decode trials for every scheme,
//! aggregated into reports with confidence intervals and the matching bounds.
//!
//! Every trial draws its randomness from streams keyed by
//! `(master seed, trial index, role)`, so a report depends only on the config
//! and seed, never on worker count or scheduling.

mod audit;
mod stats;
mod trial;

use std::collections::BTreeMap;
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use audit::{martingale_audit, AuditStat, MartingaleAudit};
pub use stats::{wilson_interval, IntegerMoments, Interval, Z95, Z99};
pub use trial::Experiment;

use crate::bounds::{SweepSpec, SweepTable};
use crate::bounds::BoundsError;
use crate::channel::{ChannelError, ChannelSpec};
use crate::codebook::{mix64, CodebookError, CodebookSpec};
use crate::sequential::SequentialError;
use crate::sources::{SourceError, SourceSpec};

/// Master seed used when a config does not set one.
pub const DEFAULT_SEED: u64 = 0x5eed_c0de_0001;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Source(#[from] SourceError),
    #[error(transparent)]
    Codebook(#[from] CodebookError),
    #[error(transparent)]
    Sequential(#[from] SequentialError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error("worker pool: {0}")]
    Pool(String),
}

pub type Result<T> = std::result::Result<T, SimError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Known-channel decoder, equiprobable messages.
    Known,
    /// Universal decoder, channel unknown to the receiver.
    Universal,
    /// Retransmit each bit over an erasure channel until it arrives.
    BecRepetition,
    /// Known-channel decoder with message-dependent thresholds from a known source law.
    JointSc,
    /// Two-stage decoding of a correlated pair.
    SlepianWolf,
    /// Universal decoder with thresholds from the Jeffreys source mixture.
    CompleteUniversal,
}

fn one() -> usize {
    1
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

/// Experiment description, read from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scheme: Scheme,
    pub channel: ChannelSpec,
    /// Defaults to uniform over `codebook.M` (or fair bits for `bec_repetition`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<SourceSpec>,
    #[serde(default)]
    pub codebook: CodebookSpec,
    /// Target error probability; required by every scheme except `bec_repetition`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    pub trials: usize,
    #[serde(default = "one")]
    pub feedback_period: usize,
    #[serde(default)]
    pub randomize_alpha: f64,
    /// Per-trial symbol cap; trials that reach it are truncated and count as errors.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_symbols: Option<usize>,
    #[serde(default = "one", alias = "worker_count")]
    pub workers: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| SimError::Config(e.to_string()))
    }
}

/// Randomness roles inside one trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Source = 1,
    Channel = 2,
    Tie = 3,
    Randomize = 4,
    Codebook = 5,
    Audit = 6,
}

/// Independent generator for `(master, index, role)`.
pub fn stream_rng(master: u64, index: u64, role: Stream) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(master, index, role))
}

pub fn stream_seed(master: u64, index: u64, role: Stream) -> u64 {
    mix64(mix64(master ^ (role as u64).wrapping_mul(0xa076_1d64_78bd_642f)) ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Replay of the universal stopping-time argument on one trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayCheck {
    /// Known-channel score of the true codeword at `T` is at most
    /// `a + (|X||Y|/2)·log2 T + β` plus its last increment.
    pub stopping_condition: bool,
    /// No earlier `t` had the known-channel score above `a + (|X||Y|/2)·log2 t + β`.
    pub dominance: bool,
}

impl ReplayCheck {
    pub fn holds(&self) -> bool {
        self.stopping_condition && self.dominance
    }
}

/// Outcome of one trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub w: usize,
    pub w_hat: Option<usize>,
    /// Channel symbols used, after rounding up to the feedback period.
    #[serde(rename = "T")]
    pub t: usize,
    pub error: bool,
    pub tie: bool,
    pub truncated: bool,
    pub aborted: bool,
    /// Symbol at which the decoder stopped, before feedback rounding.
    pub decided_at: usize,
    /// `(T1, T2)` for two-stage decoding.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage_times: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replay: Option<ReplayCheck>,
}

/// Aggregate of one experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub scheme: Scheme,
    pub trials: usize,
    pub message_count: usize,
    pub log2_m: f64,
    pub epsilon: Option<f64>,
    /// Mutual information of the codebook prior over the channel, in bits.
    pub capacity_bits: f64,
    pub feedback_period: usize,
    pub randomize_alpha: f64,
    pub max_symbols: usize,
    pub seed: u64,
    pub errors: u64,
    pub ties: u64,
    pub truncations: u64,
    pub aborts: u64,
    pub error_rate: f64,
    pub error_ci: Interval,
    pub mean_t: f64,
    pub mean_t_ci: Interval,
    pub std_t: f64,
    /// `log2 M / mean_T`; absent when every trial used zero symbols.
    pub empirical_rate: Option<f64>,
    /// Absent when the lower end of the mean-T interval is not positive.
    pub rate_ci: Option<Interval>,
    pub bounds: BTreeMap<String, f64>,
    pub extras: BTreeMap<String, f64>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn bound(&self, name: &str) -> Option<f64> {
        self.bounds.get(name).copied()
    }

    pub fn extra(&self, name: &str) -> Option<f64> {
        self.extras.get(name).copied()
    }

    /// Half width of the 95% interval on the mean stopping time.
    pub fn mean_t_half_width(&self) -> f64 {
        self.mean_t_ci.half_width()
    }

    /// Half width of the rate interval, measured below the point estimate.
    pub fn rate_lower_margin(&self) -> f64 {
        match (self.empirical_rate, self.rate_ci) {
            (Some(r), Some(ci)) => r - ci.lo,
            _ => f64::INFINITY,
        }
    }
}

/// Runs all trials of `exp` on a pool of `workers` threads, returning records in trial order.
pub fn run_trials(exp: &Experiment, workers: usize) -> Result<Vec<TrialRecord>> {
    let trials = exp.config().trials;
    if workers <= 1 {
        return Ok((0..trials).map(|i| exp.trial(i)).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| SimError::Pool(e.to_string()))?;
    Ok(pool.install(|| (0..trials).into_par_iter().map(|i| exp.trial(i)).collect()))
}

/// Runs one experiment end to end.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    Ok(run_experiment_with_records(cfg)?.0)
}

/// Like [`run_experiment`] but also returns the per-trial records.
pub fn run_experiment_with_records(cfg: &ExperimentConfig) -> Result<(Report, Vec<TrialRecord>)> {
    let exp = Experiment::new(cfg.clone())?;
    let records = run_trials(&exp, cfg.workers)?;
    let report = exp.report(&records);
    Ok((report, records))
}

/// Runs a single trial; deterministic in `(cfg, trial_index)`.
pub fn run_trial(cfg: &ExperimentConfig, trial_index: usize) -> Result<TrialRecord> {
    Ok(Experiment::new(cfg.clone())?.trial(trial_index))
}

/// Two-stage decoding of a correlated pair; the config's scheme must be `slepian_wolf`.
pub fn run_slepian_wolf(cfg: &ExperimentConfig) -> Result<Report> {
    if cfg.scheme != Scheme::SlepianWolf {
        return Err(SimError::Config("run_slepian_wolf needs scheme = slepian_wolf".into()));
    }
    run_experiment(cfg)
}

/// The same experiment at several feedback periods on identical random streams.
#[derive(Clone, Debug, PartialEq)]
pub struct FeedbackComparison {
    pub periods: Vec<usize>,
    pub reports: Vec<Report>,
    /// Trials where `T(s) > T(1) + s - 1`, per period.
    pub violations: Vec<usize>,
}

pub fn run_feedback_comparison(cfg: &ExperimentConfig, periods: &[usize]) -> Result<FeedbackComparison> {
    let mut base_cfg = cfg.clone();
    base_cfg.feedback_period = 1;
    let (_, base) = run_experiment_with_records(&base_cfg)?;
    let mut reports = Vec::new();
    let mut violations = Vec::new();
    for &s in periods {
        let mut c = cfg.clone();
        c.feedback_period = s;
        let (report, records) = run_experiment_with_records(&c)?;
        let bad = records
            .iter()
            .zip(&base)
            .filter(|(r, b)| !b.truncated && !r.truncated && r.t > b.t + s - 1)
            .count();
        reports.push(report);
        violations.push(bad);
    }
    Ok(FeedbackComparison { periods: periods.to_vec(), reports, violations })
}

/// Writes `trial,w,w_hat,T,error,tie,truncated` rows.
pub fn write_trials_csv<W: Write>(records: &[TrialRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["trial", "w", "w_hat", "T", "error", "tie", "truncated"])?;
    for r in records {
        w.write_record([
            r.trial.to_string(),
            r.w.to_string(),
            r.w_hat.map(|v| v.to_string()).unwrap_or_default(),
            r.t.to_string(),
            r.error.to_string(),
            r.tie.to_string(),
            r.truncated.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Largest `log2 M` a simulated sweep row may use.
pub const MAX_SIMULATED_LOG2_M: f64 = 20.0;

/// Adds simulated known-channel columns to a sweep table: `sim_rate`,
/// `sim_rate_lo`, `sim_mean_t`, `sim_error_rate`. Rows vary `log2_m`
/// (rounded to an integer) or `epsilon`; other axes are rejected.
pub fn simulate_sweep(spec: &SweepSpec, table: &mut SweepTable) -> Result<()> {
    let Some(opts) = &spec.simulate else {
        return Ok(());
    };
    let Some(channel) = spec.channel.clone() else {
        return Err(SimError::Config("simulated sweeps need a channel".into()));
    };
    let axis = spec.sweep.variable.as_str();
    if axis != "log2_m" && axis != "epsilon" {
        return Err(SimError::Config(format!("cannot simulate along '{axis}'; use log2_m or epsilon")));
    }
    let mut cols: [Vec<Option<f64>>; 4] = Default::default();
    for row in &table.rows {
        let v = row[0].expect("axis cell is always set");
        let (log2_m, epsilon) = match axis {
            "log2_m" => (v, spec.fixed.epsilon),
            _ => (spec.fixed.log2_m.unwrap_or(f64::NAN), Some(v)),
        };
        let k = log2_m.round();
        if !(1.0..=MAX_SIMULATED_LOG2_M).contains(&k) {
            return Err(SimError::Config(format!(
                "simulated rows need integer log2_m in [1, {MAX_SIMULATED_LOG2_M}], got {log2_m}"
            )));
        }
        let cfg = ExperimentConfig {
            scheme: Scheme::Known,
            channel: channel.clone(),
            source: None,
            codebook: CodebookSpec { message_count: Some(1usize << k as u32), ..Default::default() },
            epsilon,
            trials: opts.trials,
            feedback_period: 1,
            randomize_alpha: 0.0,
            max_symbols: None,
            workers: opts.workers.unwrap_or(1),
            seed: opts.seed.unwrap_or(DEFAULT_SEED),
        };
        let r = run_experiment(&cfg)?;
        cols[0].push(r.empirical_rate);
        cols[1].push(r.rate_ci.map(|c| c.lo));
        cols[2].push(Some(r.mean_t));
        cols[3].push(Some(r.error_rate));
    }
    for (name, col) in ["sim_rate", "sim_rate_lo", "sim_mean_t", "sim_error_rate"].iter().zip(cols) {
        table.push_column(name, col);
    }
    Ok(())
}

#[cfg(test)]
mod tests;
