use std::collections::BTreeMap;

use rand::Rng;

use super::*;
use crate::bounds;
use crate::channel::{AwgnChannel, ChannelModel, Dmc, InputPrior};
use crate::codebook::{Codebook, GaussianCodebook};
use crate::mixture::{redundancy_constants, KtLogTable};
use crate::sequential::*;
use crate::sources::*;

enum Sampler {
    Messages(MessageSource),
    Blocks(IidSymbolSource),
}

impl Sampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match self {
            Sampler::Messages(s) => s.sample_message(rng),
            Sampler::Blocks(s) => s.encode_block(&s.sample_block(rng)).expect("indexed block source"),
        }
    }

    fn probs(&self) -> Result<Vec<f64>> {
        Ok(match self {
            Sampler::Messages(s) => s.probs().to_vec(),
            Sampler::Blocks(s) => s.message_probs()?,
        })
    }

    fn entropy_bits(&self) -> f64 {
        match self {
            Sampler::Messages(s) => s.entropy_bits(),
            Sampler::Blocks(s) => s.entropy_bits(),
        }
    }
}

struct UniversalParts {
    log_prior: Vec<f64>,
    kt: KtLogTable,
    loose: f64,
    beta: f64,
}

enum Engine {
    Discrete {
        dmc: Dmc,
        prior: InputPrior,
        table: LogRatioTable,
        thresholds: ThresholdScheme,
        sampler: Sampler,
        universal: Option<UniversalParts>,
    },
    Gaussian {
        channel: AwgnChannel,
        thresholds: ThresholdScheme,
        sampler: Sampler,
    },
    Bec {
        dmc: Dmc,
        delta: f64,
    },
    Pair {
        dmc: Dmc,
        prior: InputPrior,
        backward: LogRatioTable,
        forward: LogRatioTable,
        pair: CorrelatedPairSource,
        stage1: ThresholdScheme,
        epsilon: f64,
    },
}

/// Validated, precomputed experiment: channel tables, thresholds and caps are
/// built once and shared by all trials.
pub struct Experiment {
    cfg: ExperimentConfig,
    engine: Engine,
    message_count: usize,
    capacity: f64,
    max_symbols: usize,
    randomizer: Randomizer,
}

/// Decoder result before feedback rounding.
struct Outcome {
    decision: Decision,
    t: usize,
    replay: Option<ReplayCheck>,
}

fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(SimError::Config(msg.into()))
}

fn max_finite(th: &ThresholdScheme) -> f64 {
    th.as_slice().iter().copied().filter(|a| a.is_finite()).fold(0.0, f64::max)
}

fn default_cap(a_max: f64, capacity: f64) -> Result<usize> {
    if capacity <= 1e-12 {
        return config("channel carries no information under this prior; set max_symbols explicitly");
    }
    Ok((64.0 * (a_max + capacity) / capacity).ceil().max(1.0) as usize)
}

impl Experiment {
    pub fn new(cfg: ExperimentConfig) -> Result<Self> {
        if cfg.trials == 0 {
            return config("trials must be >= 1");
        }
        if cfg.feedback_period == 0 {
            return config("feedback_period must be >= 1");
        }
        if cfg.workers == 0 {
            return config("workers must be >= 1");
        }
        if cfg.max_symbols == Some(0) {
            return config("max_symbols must be >= 1");
        }
        let randomizer = Randomizer::new(cfg.randomize_alpha)?;
        let model = cfg.channel.build()?;
        let epsilon = match (cfg.scheme, cfg.epsilon) {
            (Scheme::BecRepetition, e) => e.unwrap_or(0.5),
            (_, Some(e)) if e > 0.0 && e < 1.0 => e,
            (_, Some(e)) => return config(format!("epsilon = {e} must lie in (0, 1)")),
            (_, None) => return config("epsilon is required"),
        };
        let simple = cfg.feedback_period == 1 && cfg.randomize_alpha == 0.0;
        match cfg.scheme {
            Scheme::BecRepetition => {
                let ChannelSpec::Bec { delta } = cfg.channel else {
                    return config("bec_repetition needs a bec channel");
                };
                if !simple {
                    return config("bec_repetition supports neither feedback_period nor randomize_alpha");
                }
                let dmc = model.as_discrete().expect("bec is discrete").clone();
                let capacity = 1.0 - delta;
                let max_symbols = match cfg.max_symbols {
                    Some(m) => m,
                    None => default_cap(1.0, capacity)?,
                };
                Ok(Self { cfg, engine: Engine::Bec { dmc, delta }, message_count: 2, capacity, max_symbols, randomizer })
            }
            Scheme::SlepianWolf => {
                if !simple {
                    return config("slepian_wolf supports neither feedback_period nor randomize_alpha");
                }
                let Some(dmc) = model.as_discrete().cloned() else {
                    return config("slepian_wolf needs a discrete channel");
                };
                let Some(SourceModel::Pair(pair)) = cfg.source.as_ref().map(SourceSpec::build).transpose()? else {
                    return config("slepian_wolf needs a pair or xor_pair source");
                };
                let (m1, m2) = pair.sizes();
                if m1 < 2 || m2 < 2 {
                    return config("both messages of the pair need at least 2 values");
                }
                let prior = Self::prior(&cfg, &model, false)?;
                let capacity = dmc.mutual_information(&prior)?;
                let backward = LogRatioTable::backward(&dmc.backward_channel(&prior)?, &prior);
                let forward = LogRatioTable::forward(&dmc, &prior);
                let stage1 = ThresholdScheme::on_support(pair.marginal1(), epsilon / 2.0)?;
                let min_cond = pair.joint().iter().flatten().zip(pair.marginal1().iter().flat_map(|&m| std::iter::repeat_n(m, m2)))
                    .filter(|(p, _)| **p > 0.0)
                    .map(|(p, m)| p / m)
                    .fold(1.0, f64::min);
                let a2_max = -min_cond.log2() - (epsilon / 2.0).log2();
                let max_symbols = match cfg.max_symbols {
                    Some(m) => m,
                    None => default_cap(max_finite(&stage1) + a2_max + capacity, capacity)?,
                };
                Ok(Self {
                    cfg,
                    engine: Engine::Pair { dmc, prior, backward, forward, pair, stage1, epsilon },
                    message_count: m1 * m2,
                    capacity,
                    max_symbols,
                    randomizer,
                })
            }
            scheme => {
                let source = match &cfg.source {
                    Some(spec) => spec.build()?,
                    None => match cfg.codebook.message_count {
                        Some(m) => SourceModel::Messages(MessageSource::uniform(m)?),
                        None => return config("set either source or codebook.M"),
                    },
                };
                let sampler = match source {
                    SourceModel::Messages(s) => Sampler::Messages(s),
                    SourceModel::Blocks(s) if s.message_count().is_some() => Sampler::Blocks(s),
                    SourceModel::Blocks(_) => return config("block source too large to index"),
                    SourceModel::Pair(_) => return config("pair sources need scheme slepian_wolf"),
                };
                let m = match &sampler {
                    Sampler::Messages(s) => s.message_count(),
                    Sampler::Blocks(s) => s.message_count().expect("checked"),
                };
                if let Some(cm) = cfg.codebook.message_count {
                    if cm != m {
                        return config(format!("codebook.M = {cm} but the source has {m} messages"));
                    }
                }
                let thresholds = match scheme {
                    Scheme::Known | Scheme::Universal => ThresholdScheme::equiprobable(m, epsilon)?,
                    Scheme::JointSc => ThresholdScheme::on_support(&sampler.probs()?, epsilon)?,
                    Scheme::CompleteUniversal => match &sampler {
                        Sampler::Blocks(s) => universal_threshold_scheme(s, epsilon)?,
                        Sampler::Messages(_) => return config("complete_universal needs an iid block source"),
                    },
                    Scheme::BecRepetition | Scheme::SlepianWolf => unreachable!(),
                };
                let universal = matches!(scheme, Scheme::Universal | Scheme::CompleteUniversal);
                match model {
                    ChannelModel::Gaussian(channel) => {
                        if universal {
                            return config("universal decoding is only implemented for discrete channels");
                        }
                        let capacity = channel.capacity_bits();
                        let max_symbols = match cfg.max_symbols {
                            Some(v) => v,
                            None => default_cap(max_finite(&thresholds), capacity)?,
                        };
                        Ok(Self {
                            cfg,
                            engine: Engine::Gaussian { channel, thresholds, sampler },
                            message_count: m,
                            capacity,
                            max_symbols,
                            randomizer,
                        })
                    }
                    ChannelModel::Discrete(ref dmc) => {
                        let dmc = dmc.clone();
                        let prior = Self::prior(&cfg, &model, universal)?;
                        let capacity = dmc.mutual_information(&prior)?;
                        let table = LogRatioTable::backward(&dmc.backward_channel(&prior)?, &prior);
                        let max_symbols = match cfg.max_symbols {
                            Some(v) => v,
                            None => default_cap(max_finite(&thresholds), capacity)?,
                        };
                        let universal = if universal {
                            let rc = redundancy_constants::<f64>(dmc.input_size(), dmc.output_size())
                                .map_err(|e| SimError::Config(e.to_string()))?;
                            Some(UniversalParts {
                                log_prior: log_prior_table(&prior),
                                kt: KtLogTable::new(dmc.input_size(), max_symbols + 1),
                                loose: rc.loose_coeff,
                                beta: rc.beta,
                            })
                        } else {
                            None
                        };
                        Ok(Self {
                            cfg,
                            engine: Engine::Discrete { dmc, prior, table, thresholds, sampler, universal },
                            message_count: m,
                            capacity,
                            max_symbols,
                            randomizer,
                        })
                    }
                }
            }
        }
    }

    /// Codebook prior: explicit, else uniform for decoders that do not know the
    /// channel, else capacity-achieving.
    fn prior(cfg: &ExperimentConfig, model: &ChannelModel, universal: bool) -> Result<InputPrior> {
        let dmc = model.as_discrete().expect("discrete");
        if let Some(p) = &cfg.codebook.prior {
            if p.len() != dmc.input_size() {
                return config(format!("codebook prior has {} entries, channel has {} inputs", p.len(), dmc.input_size()));
            }
            return Ok(InputPrior::new(p.clone())?);
        }
        if universal {
            return Ok(InputPrior::uniform(dmc.input_size()));
        }
        let (_, prior) = model.capacity()?;
        Ok(prior.expect("discrete channels return a prior"))
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    pub fn message_count(&self) -> usize {
        self.message_count
    }

    /// Mutual information of the codebook prior (capacity for Gaussian and BEC runs).
    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn max_symbols(&self) -> usize {
        self.max_symbols
    }

    /// Thresholds of the single-stage schemes.
    pub fn thresholds(&self) -> Option<&ThresholdScheme> {
        match &self.engine {
            Engine::Discrete { thresholds, .. } | Engine::Gaussian { thresholds, .. } => Some(thresholds),
            _ => None,
        }
    }

    fn codebook_seed(&self, index: u64) -> u64 {
        stream_seed(mix64(self.cfg.seed) ^ self.cfg.codebook.seed, index, Stream::Codebook)
    }

    /// Runs trial `index`.
    pub fn trial(&self, index: usize) -> TrialRecord {
        let idx = index as u64;
        let seed = self.cfg.seed;
        let mut src = stream_rng(seed, idx, Stream::Source);
        let mut ch = stream_rng(seed, idx, Stream::Channel);
        let mut tie = stream_rng(seed, idx, Stream::Tie);
        let mut rnd = stream_rng(seed, idx, Stream::Randomize);
        let cb_seed = self.codebook_seed(idx);
        let cap = self.max_symbols;
        match &self.engine {
            Engine::Bec { dmc, .. } => {
                let bit = usize::from(src.random_bool(0.5));
                let mut rec = blank(index, bit);
                for t in 1..=cap {
                    let y = dmc.sample_output(bit, &mut ch).expect("input in range");
                    if y != 2 {
                        rec.t = t;
                        rec.decided_at = t;
                        rec.w_hat = Some(y);
                        rec.error = y != bit;
                        return rec;
                    }
                }
                truncate(&mut rec, cap);
                rec
            }
            Engine::Discrete { dmc, prior, table, thresholds, sampler, universal } => {
                let w = sampler.sample(&mut src);
                if self.randomizer.begin(&mut rnd).is_some() {
                    return aborted(index, w);
                }
                let cb = Codebook::new(cb_seed, self.message_count, prior.clone()).expect("validated");
                let out = decode_discrete(&cb, w, dmc, table, thresholds, universal.as_ref(), &mut ch, cap);
                self.finish(index, w, out, &mut tie)
            }
            Engine::Gaussian { channel, thresholds, sampler } => {
                let w = sampler.sample(&mut src);
                if self.randomizer.begin(&mut rnd).is_some() {
                    return aborted(index, w);
                }
                let cb = GaussianCodebook::new(cb_seed, self.message_count, channel.signal_power()).expect("validated");
                let mut state = KnownChannelState::for_gaussian(&cb);
                let key = cb.key(w);
                let mut out = Outcome { decision: Decision::Continue, t: cap, replay: None };
                for t in 0..cap {
                    let y = channel.sample_output(cb.symbol_with_key(key, t), &mut ch);
                    let d = awgn_step(&mut state, y, &cb, channel, thresholds);
                    if d.is_final() {
                        out = Outcome { decision: d, t: t + 1, replay: None };
                        break;
                    }
                }
                self.finish(index, w, out, &mut tie)
            }
            Engine::Pair { dmc, prior, backward, forward, pair, stage1, epsilon } => {
                let (w1, w2) = pair.sample_pair(&mut src);
                let (m1, m2) = pair.sizes();
                let mut rec = blank(index, w1 * m2 + w2);
                let cb1 = Codebook::new(cb_seed, m1, prior.clone()).expect("validated");
                let first = decode_discrete(&cb1, w1, dmc, backward, stage1, None, &mut ch, cap);
                let Some((w1_hat, tie1)) = resolve(&first.decision, &mut tie) else {
                    truncate(&mut rec, cap);
                    rec.stage_times = Some([cap, 0]);
                    return rec;
                };
                let t1 = first.t;
                let th2 = side_info_thresholds(pair.conditional_row(w1_hat), *epsilon).expect("decided message has mass");
                let cb2 = Codebook::new(mix64(cb_seed ^ 0x5157), m2, prior.clone()).expect("validated");
                let second = decode_discrete(&cb2, w2, dmc, forward, &th2, None, &mut ch, cap - t1);
                rec.decided_at = t1 + second.t;
                rec.t = rec.decided_at;
                rec.stage_times = Some([t1, second.t]);
                match resolve(&second.decision, &mut tie) {
                    Some((w2_hat, tie2)) => {
                        rec.w_hat = Some(w1_hat * m2 + w2_hat);
                        rec.tie = tie1 || tie2;
                        rec.error = rec.tie || w1_hat != w1 || w2_hat != w2;
                    }
                    None => {
                        rec.truncated = true;
                        rec.error = true;
                        rec.tie = tie1;
                    }
                }
                rec
            }
        }
    }

    fn finish<R: Rng + ?Sized>(&self, index: usize, w: usize, out: Outcome, tie_rng: &mut R) -> TrialRecord {
        let mut rec = blank(index, w);
        rec.replay = out.replay;
        match resolve(&out.decision, tie_rng) {
            None => {
                truncate(&mut rec, out.t);
                return rec;
            }
            Some((w_hat, tie)) => {
                rec.w_hat = Some(w_hat);
                rec.tie = tie;
                rec.error = tie || w_hat != w;
            }
        }
        let s = self.cfg.feedback_period;
        rec.decided_at = out.t;
        rec.t = out.t.div_ceil(s) * s;
        if rec.t > self.max_symbols {
            rec.t = self.max_symbols;
            rec.truncated = true;
            rec.error = true;
        }
        rec
    }

    /// Aggregates records (in trial order) into a report.
    pub fn report(&self, records: &[TrialRecord]) -> Report {
        let n = records.len() as u64;
        let mut tm = IntegerMoments::default();
        tm.extend(records.iter().map(|r| r.t as u64));
        let count = |f: fn(&TrialRecord) -> bool| records.iter().filter(|r| f(r)).count() as u64;
        let errors = count(|r| r.error);
        let log2_m = (self.message_count as f64).log2();
        let mean_t = tm.mean();
        let mean_t_ci = tm.mean_interval(Z95);
        let empirical_rate = (mean_t > 0.0).then(|| log2_m / mean_t);
        let rate_ci = (mean_t_ci.lo > 0.0).then(|| Interval { lo: log2_m / mean_t_ci.hi, hi: log2_m / mean_t_ci.lo });
        let epsilon = match self.cfg.scheme {
            Scheme::BecRepetition => None,
            _ => self.cfg.epsilon,
        };
        Report {
            scheme: self.cfg.scheme,
            trials: records.len(),
            message_count: self.message_count,
            log2_m,
            epsilon,
            capacity_bits: self.capacity,
            feedback_period: self.cfg.feedback_period,
            randomize_alpha: self.cfg.randomize_alpha,
            max_symbols: self.max_symbols,
            seed: self.cfg.seed,
            errors,
            ties: count(|r| r.tie),
            truncations: count(|r| r.truncated),
            aborts: count(|r| r.aborted),
            error_rate: errors as f64 / n as f64,
            error_ci: wilson_interval(errors, n, Z95),
            mean_t,
            mean_t_ci,
            std_t: tm.std_dev(),
            empirical_rate,
            rate_ci,
            bounds: self.bounds(),
            extras: self.extras(records),
        }
    }

    fn bounds(&self) -> BTreeMap<String, f64> {
        let mut b = BTreeMap::new();
        let c = self.capacity;
        let k = (self.message_count as f64).log2();
        let mut put = |name: &str, v: std::result::Result<f64, bounds::BoundsError>| {
            if let Ok(v) = v {
                b.insert(name.to_string(), v);
            }
        };
        let eps = self.cfg.epsilon.unwrap_or(f64::NAN);
        let alpha = self.cfg.randomize_alpha;
        let s = self.cfg.feedback_period as f64;
        let xy = match &self.engine {
            Engine::Discrete { dmc, .. } | Engine::Pair { dmc, .. } => Some((dmc.input_size(), dmc.output_size())),
            _ => None,
        };
        match self.cfg.scheme {
            Scheme::Known => {
                put("rate_known", bounds::rate_known(c, k, eps));
                put("expected_time_known", bounds::expected_time_known(c, k, eps));
                put("converse_rate", bounds::converse_rate(c, k, eps));
                put("rate_known_randomized", bounds::rate_known_randomized(c, k, eps));
                put("rate_limited_feedback", bounds::rate_limited_feedback(c, k, eps, s));
                if alpha > 0.0 {
                    if let Ok(et) = bounds::expected_time_known(c, k, eps) {
                        if let Ok((t2, e2)) = bounds::randomized_transform(et, eps, alpha) {
                            put("expected_time_randomized", Ok(t2));
                            put("error_bound_randomized", Ok(e2));
                        }
                    }
                }
            }
            Scheme::Universal => {
                let (x, y) = xy.expect("discrete");
                put("rate_universal", bounds::rate_universal(c, k, eps, x, y));
                put("expected_time_universal", bounds::expected_time_universal(c, k, eps, x, y));
                put("rate_known", bounds::rate_known(c, k, eps));
                put("converse_rate", bounds::converse_rate(c, k, eps));
            }
            Scheme::JointSc => {
                let h = self.source_entropy();
                put("joint_sc_expected_time", bounds::joint_sc_expected_time(h, c, eps));
                put("joint_sc_rate", bounds::joint_sc_rate(c, k, eps, h / k));
            }
            Scheme::CompleteUniversal => {
                let (x, y) = xy.expect("discrete");
                let h = self.source_entropy();
                if let Engine::Discrete { sampler: Sampler::Blocks(src), .. } = &self.engine {
                    let (sa, l) = (src.alphabet_size(), src.block_len() as f64);
                    for (name, res) in [("rate_complete_universal_residual0", 0.0), ("rate_complete_universal_residual2", 2.0)] {
                        put(name, bounds::rate_complete_universal(c, k, eps, x, y, h / k, sa, l, res));
                    }
                }
                put("rate_joint_universal", bounds::rate_joint_universal(c, k, eps, h / k, x, y));
                put("joint_sc_rate", bounds::joint_sc_rate(c, k, eps, h / k));
            }
            Scheme::SlepianWolf => {
                if let Engine::Pair { pair, .. } = &self.engine {
                    let (h1, h21, _) = conditional_entropy(pair);
                    if let Ok(sw) = bounds::slepian_wolf_rates(h1, h21, eps) {
                        put("slepian_wolf_r1", Ok(sw.r1));
                        put("slepian_wolf_r2", Ok(sw.r2));
                        put("slepian_wolf_sum", Ok(sw.sum));
                    }
                }
            }
            Scheme::BecRepetition => {
                if let Engine::Bec { delta, .. } = &self.engine {
                    put("expected_transmissions", Ok(1.0 / (1.0 - delta)));
                }
            }
        }
        b
    }

    fn source_entropy(&self) -> f64 {
        match &self.engine {
            Engine::Discrete { sampler, .. } | Engine::Gaussian { sampler, .. } => sampler.entropy_bits(),
            Engine::Pair { pair, .. } => conditional_entropy(pair).2,
            Engine::Bec { .. } => 1.0,
        }
    }

    fn extras(&self, records: &[TrialRecord]) -> BTreeMap<String, f64> {
        let mut e = BTreeMap::new();
        let checked: Vec<&ReplayCheck> = records.iter().filter_map(|r| r.replay.as_ref()).collect();
        if matches!(self.cfg.scheme, Scheme::Universal | Scheme::CompleteUniversal) {
            e.insert("replay_checked".into(), checked.len() as f64);
            e.insert("replay_violations".into(), checked.iter().filter(|c| !c.stopping_condition).count() as f64);
            e.insert("dominance_violations".into(), checked.iter().filter(|c| !c.dominance).count() as f64);
        }
        if self.cfg.feedback_period > 1 {
            let mut m = IntegerMoments::default();
            m.extend(records.iter().filter(|r| !r.aborted).map(|r| r.decided_at as u64));
            e.insert("mean_decided_at".into(), m.mean());
        }
        if matches!(self.cfg.scheme, Scheme::JointSc | Scheme::CompleteUniversal | Scheme::SlepianWolf) {
            e.insert("source_entropy_bits".into(), self.source_entropy());
        }
        if let Engine::Pair { pair, .. } = &self.engine {
            let (h1, h21, hj) = conditional_entropy(pair);
            e.insert("h1".into(), h1);
            e.insert("h2_given_1".into(), h21);
            e.insert("h_joint".into(), hj);
            for (i, name) in ["t1", "t2"].iter().enumerate() {
                let mut m = IntegerMoments::default();
                m.extend(records.iter().filter_map(|r| r.stage_times).map(|st| st[i] as u64));
                e.insert(format!("mean_{name}"), m.mean());
                e.insert(format!("mean_{name}_ci_half"), m.mean_interval(Z95).half_width());
            }
        }
        e
    }
}

fn blank(index: usize, w: usize) -> TrialRecord {
    TrialRecord {
        trial: index,
        w,
        w_hat: None,
        t: 0,
        error: false,
        tie: false,
        truncated: false,
        aborted: false,
        decided_at: 0,
        stage_times: None,
        replay: None,
    }
}

fn aborted(index: usize, w: usize) -> TrialRecord {
    TrialRecord { error: true, aborted: true, ..blank(index, w) }
}

fn truncate(rec: &mut TrialRecord, t: usize) {
    rec.t = t;
    rec.decided_at = t;
    rec.truncated = true;
    rec.error = true;
    rec.w_hat = None;
}

/// `(decided message, was a tie)`, or `None` if the decoder never stopped.
fn resolve<R: Rng + ?Sized>(d: &Decision, rng: &mut R) -> Option<(usize, bool)> {
    match d {
        Decision::Decide { message, .. } => Some((*message, false)),
        Decision::Tie { .. } => Some(resolve_tie(d, rng).expect("ties have two or more members")),
        Decision::Continue | Decision::Abort => None,
    }
}

/// Streams the true codeword through the channel until the decoder stops or `cap` symbols pass.
#[allow(clippy::too_many_arguments)]
fn decode_discrete<R: Rng + ?Sized>(
    cb: &Codebook,
    w: usize,
    dmc: &Dmc,
    table: &LogRatioTable,
    th: &ThresholdScheme,
    universal: Option<&UniversalParts>,
    rng: &mut R,
    cap: usize,
) -> Outcome {
    let key = cb.key(w);
    match universal {
        None => {
            let mut state = KnownChannelState::for_codebook(cb);
            for t in 0..cap {
                let y = dmc.sample_output(cb.symbol_with_key(key, t), rng).expect("input in range");
                let d = known_step(&mut state, y, cb, table, th);
                if d.is_final() {
                    return Outcome { decision: d, t: t + 1, replay: None };
                }
            }
            Outcome { decision: Decision::Continue, t: cap, replay: None }
        }
        Some(u) => {
            let mut state = UniversalState::new(cb, dmc.output_size());
            let a = th.get(w);
            let mut known = 0.0;
            let mut dominance = true;
            for t in 0..cap {
                let x = cb.symbol_with_key(key, t);
                let y = dmc.sample_output(x, rng).expect("input in range");
                let z = table.get(x, y);
                known += z;
                let d = universal_step(&mut state, y, cb, &u.log_prior, &u.kt, th);
                let rhs = a + u.loose * ((t + 1) as f64).log2() + u.beta;
                if d.is_final() {
                    let stopping_condition = known <= rhs + z + 1e-9;
                    return Outcome {
                        decision: d,
                        t: t + 1,
                        replay: Some(ReplayCheck { stopping_condition, dominance }),
                    };
                }
                if known >= rhs + 1e-9 {
                    dominance = false;
                }
            }
            Outcome { decision: Decision::Continue, t: cap, replay: None }
        }
    }
}
