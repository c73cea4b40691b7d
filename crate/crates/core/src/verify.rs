//! Empirical verification suite: thirteen numbered criteria, each a
//! Monte Carlo or exhaustive check of one guarantee against its closed form.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bounds;
use crate::channel::{Dmc, InputPrior};
use crate::mixture::{dirichlet_log_prob, ml_log_prob, mixture_log_prob, redundancy_bound, CountMatrix};
use crate::oracle::binary_mixture_prob;
use crate::sim::{self, martingale_audit, run_feedback_comparison, ExperimentConfig, Report, Scheme, SimError};
use crate::sources::SourceSpec;
use crate::channel::ChannelSpec;
use crate::codebook::CodebookSpec;

/// `Full` runs every criterion at its stated size. `Quick` keeps the stated
/// trial counts wherever an error-rate check needs them, drops the `2^12`
/// configurations of criterion 2, skips criterion 6, and shrinks the checks
/// that are not statistical.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifyScale {
    Quick,
    Full,
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub scale: VerifyScale,
    pub seed: u64,
    pub workers: usize,
    /// Dirichlet pseudocount used where criteria 4 and 5 evaluate the mixture.
    /// Anything other than 1/2 is a negative control and should fail.
    pub kt_pseudocount: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { scale: VerifyScale::Full, seed: sim::DEFAULT_SEED, workers: 1, kt_pseudocount: 0.5 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub pass: bool,
    pub skipped: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "{} criterion {:>2} {}: {} ({:.1}s)",
            if self.skipped {
                "SKIP"
            } else if self.pass {
                "PASS"
            } else {
                "FAIL"
            },
            self.id,
            self.name,
            self.detail,
            self.seconds
        )
    }
}

pub const CRITERIA: [(u8, &str); 13] = [
    (1, "bec repetition"),
    (2, "known-channel achievability"),
    (3, "martingale audits"),
    (4, "mixture oracle"),
    (5, "mixture redundancy"),
    (6, "universal achievability"),
    (7, "randomized decisions"),
    (8, "converse sanity"),
    (9, "joint source-channel"),
    (10, "two-stage correlated sources"),
    (11, "complete universality"),
    (12, "limited feedback"),
    (13, "determinism"),
];

/// Runs criteria in order. Reports from 2 and 6 are reused by 8.
pub struct Verifier {
    opts: VerifyOptions,
    known_reports: Option<Vec<Report>>,
    universal_report: Option<Report>,
}

type VResult<T> = std::result::Result<T, SimError>;

impl Verifier {
    pub fn new(opts: VerifyOptions) -> Self {
        Self { opts, known_reports: None, universal_report: None }
    }

    pub fn run_all(&mut self) -> Vec<CriterionResult> {
        CRITERIA.iter().map(|&(id, _)| self.run(id)).collect()
    }

    pub fn run(&mut self, id: u8) -> CriterionResult {
        let name = CRITERIA.iter().find(|c| c.0 == id).map_or("unknown", |c| c.1);
        let start = Instant::now();
        if self.quick() && id == 6 {
            return CriterionResult { id, name, pass: true, skipped: true, detail: "not run in quick mode".into(), seconds: 0.0 };
        }
        let out = match id {
            1 => self.bec(),
            2 => self.known(),
            3 => self.audit(),
            4 => self.mixture_oracle(),
            5 => self.redundancy(),
            6 => self.universal(),
            7 => self.randomized(),
            8 => self.converse(),
            9 => self.joint_sc(),
            10 => self.slepian_wolf(),
            11 => self.complete_universal(),
            12 => self.feedback(),
            13 => self.determinism(),
            _ => Ok((false, format!("no criterion {id}"))),
        };
        let (pass, detail) = out.unwrap_or_else(|e| (false, format!("error: {e}")));
        CriterionResult { id, name, pass, skipped: false, detail, seconds: start.elapsed().as_secs_f64() }
    }

    fn quick(&self) -> bool {
        self.opts.scale == VerifyScale::Quick
    }

    fn scaled(&self, full: usize, quick: usize) -> usize {
        if self.quick() {
            quick
        } else {
            full
        }
    }

    fn base(&self, scheme: Scheme, channel: ChannelSpec, trials: usize) -> ExperimentConfig {
        ExperimentConfig {
            scheme,
            channel,
            source: None,
            codebook: CodebookSpec::default(),
            epsilon: None,
            trials,
            feedback_period: 1,
            randomize_alpha: 0.0,
            max_symbols: None,
            workers: self.opts.workers,
            seed: self.opts.seed,
        }
    }

    fn known_cfg(&self, p: f64, log2_m: u32, log2_inv_eps: i32) -> ExperimentConfig {
        let mut c = self.base(Scheme::Known, ChannelSpec::Bsc { p }, 10_000);
        c.codebook.message_count = Some(1 << log2_m);
        c.epsilon = Some((-log2_inv_eps as f64).exp2());
        c
    }

    fn bec(&mut self) -> VResult<(bool, String)> {
        let mut pass = true;
        let mut parts = Vec::new();
        for delta in [0.25, 0.5, 0.75] {
            let c = self.base(Scheme::BecRepetition, ChannelSpec::Bec { delta }, 100_000);
            let r = sim::run_experiment(&c)?;
            let target = 1.0 / (1.0 - delta);
            let ok = (r.mean_t / target - 1.0).abs() <= 0.02 && r.errors == 0;
            pass &= ok;
            parts.push(format!("δ={delta}: {:.4} vs {target:.4}", r.mean_t));
        }
        Ok((pass, parts.join("; ")))
    }

    fn known_reports(&mut self) -> VResult<Vec<Report>> {
        if let Some(r) = &self.known_reports {
            return Ok(r.clone());
        }
        let mut out = Vec::new();
        for p in [0.25, 0.11] {
            let sizes: &[u32] = if self.quick() { &[8] } else { &[8, 12] };
            for &log2_m in sizes {
                for e in [4, 8] {
                    out.push(sim::run_experiment(&self.known_cfg(p, log2_m, e))?);
                }
            }
        }
        self.known_reports = Some(out.clone());
        Ok(out)
    }

    fn known(&mut self) -> VResult<(bool, String)> {
        let mut pass = true;
        let mut bad = Vec::new();
        let reports = self.known_reports()?;
        for r in &reports {
            let eps = r.epsilon.unwrap_or(f64::NAN);
            let c = r.capacity_bits;
            let wald = (r.log2_m - eps.log2() + c) / c;
            let rate = bounds::rate_known(c, r.log2_m, eps)?;
            let ok_err = r.error_ci.hi <= eps;
            let ok_t = r.mean_t <= wald + r.mean_t_half_width();
            let ok_r = r.empirical_rate.unwrap_or(0.0) >= rate - r.rate_lower_margin();
            if !(ok_err && ok_t && ok_r) {
                pass = false;
                bad.push(format!(
                    "C={c:.4} log2M={} ε={eps}: err_hi={:.5} T={:.2}/{wald:.2} R={:.4}/{rate:.4}",
                    r.log2_m, r.error_ci.hi, r.mean_t, r.empirical_rate.unwrap_or(0.0)
                ));
            }
        }
        let worst = reports.iter().map(|r| r.mean_t / ((r.log2_m - r.epsilon.unwrap().log2() + r.capacity_bits) / r.capacity_bits)).fold(0.0, f64::max);
        let detail = if pass {
            format!("{} configs; max mean_T / Wald bound = {worst:.4}", reports.len())
        } else {
            bad.join("; ")
        };
        Ok((pass, detail))
    }

    fn audit(&mut self) -> VResult<(bool, String)> {
        let dmc = Dmc::bsc(0.25)?;
        let samples = 100_000;
        let a = martingale_audit(&dmc, &InputPrior::uniform(2), 200, samples, 10.0, self.opts.seed)?;
        let pass = a.known.mean_consistent() && a.universal.mean_consistent() && a.known.crossing_ok() && a.universal.crossing_ok();
        Ok((
            pass,
            format!(
                "known mean {:.4}±{:.4} cross {:.5}; universal mean {:.4}±{:.4} cross {:.5}; bound {:.5}+{:.5}",
                a.known.mean,
                a.known.ci99.half_width(),
                a.known.crossing_fraction,
                a.universal.mean,
                a.universal.ci99.half_width(),
                a.universal.crossing_fraction,
                a.known.crossing_bound,
                3.0 * a.known.crossing_sigma
            ),
        ))
    }

    fn mixture(&self, cm: &CountMatrix) -> f64 {
        if self.opts.kt_pseudocount == 0.5 {
            mixture_log_prob(cm)
        } else {
            dirichlet_log_prob(cm, self.opts.kt_pseudocount)
        }
    }

    fn mixture_oracle(&mut self) -> VResult<(bool, String)> {
        let max_len = match self.opts.scale {
            VerifyScale::Full => 8,
            VerifyScale::Quick => 6,
        };
        let mut worst = 0.0f64;
        let mut checked = 0usize;
        for y_size in [1usize, 2] {
            for t in 1..=max_len {
                let y_patterns = if y_size == 1 { 1 } else { 1usize << t };
                for xb in 0..(1usize << t) {
                    for yb in 0..y_patterns {
                        let xs: Vec<usize> = (0..t).map(|k| (xb >> k) & 1).collect();
                        let ys: Vec<usize> = (0..t).map(|k| if y_size == 1 { 0 } else { (yb >> k) & 1 }).collect();
                        let cm = CountMatrix::from_pairs(2, y_size, &xs, &ys).expect("in range");
                        let closed = self.mixture(&cm).exp2();
                        let reference = binary_mixture_prob(&xs, &ys, y_size);
                        worst = worst.max((closed / reference - 1.0).abs());
                        checked += 1;
                    }
                }
            }
        }
        Ok((worst <= 1e-6, format!("{checked} sequences, max relative gap {worst:.2e}")))
    }

    fn redundancy(&mut self) -> VResult<(bool, String)> {
        let pairs = self.scaled(10_000, 1_000);
        let mut rng = ChaCha8Rng::seed_from_u64(self.opts.seed ^ 0x1e44a2);
        let mut violations = 0;
        let mut max_slack = f64::NEG_INFINITY;
        for (nx, ny) in [(2usize, 2usize), (3, 2)] {
            for _ in 0..pairs {
                let t = rng.random_range(1..=500usize);
                // Skewed per-column laws make the ML fit sharp, which is where the bound is tight.
                let law: Vec<Vec<f64>> = (0..ny)
                    .map(|_| {
                        let raw: Vec<f64> = (0..nx).map(|_| rng.random::<f64>().powi(4)).collect();
                        let s: f64 = raw.iter().sum();
                        raw.iter().map(|v| v / s).collect()
                    })
                    .collect();
                let mut cm = CountMatrix::new(nx, ny);
                for _ in 0..t {
                    let y = rng.random_range(0..ny);
                    let u: f64 = rng.random();
                    let mut acc = 0.0;
                    let mut x = nx - 1;
                    for (i, p) in law[y].iter().enumerate() {
                        acc += p;
                        if u < acc {
                            x = i;
                            break;
                        }
                    }
                    cm.increment(x, y);
                }
                let gap = ml_log_prob(&cm) - self.mixture(&cm);
                let bound: f64 = redundancy_bound(t as u64, nx, ny).expect("valid sizes");
                max_slack = max_slack.max(gap - bound);
                if gap > bound {
                    violations += 1;
                }
            }
        }
        Ok((violations == 0, format!("{} pairs, {violations} violations, max gap - bound {max_slack:.3}", 2 * pairs)))
    }

    fn universal_report(&mut self) -> VResult<Report> {
        if let Some(r) = &self.universal_report {
            return Ok(r.clone());
        }
        if self.quick() {
            return Err(SimError::Config("universal run is skipped in quick mode".into()));
        }
        let mut c = self.base(Scheme::Universal, ChannelSpec::Bsc { p: 0.25 }, 5_000);
        c.codebook.message_count = Some(1 << 12);
        c.epsilon = Some(1.0 / 64.0);
        let r = sim::run_experiment(&c)?;
        self.universal_report = Some(r.clone());
        Ok(r)
    }

    fn universal(&mut self) -> VResult<(bool, String)> {
        let r = self.universal_report()?;
        let eps = r.epsilon.unwrap();
        let bound = r.bound("expected_time_universal").unwrap_or(f64::NAN);
        let ok_err = r.error_ci.hi <= eps;
        let ok_t = r.mean_t <= bound + r.mean_t_half_width();
        let replay_bad = r.extra("replay_violations").unwrap_or(f64::NAN) + r.extra("dominance_violations").unwrap_or(f64::NAN);
        let replayed = r.extra("replay_checked").unwrap_or(0.0) as u64 + r.truncations == r.trials as u64;
        let pass = ok_err && ok_t && replay_bad == 0.0 && replayed && r.truncations == 0;
        Ok((
            pass,
            format!(
                "err_hi={:.5} (ε={eps}), mean_T={:.2}±{:.2} vs {bound:.2}, replay violations {replay_bad}, truncations {}",
                r.error_ci.hi,
                r.mean_t,
                r.mean_t_half_width(),
                r.truncations
            ),
        ))
    }

    fn randomized(&mut self) -> VResult<(bool, String)> {
        let alpha = 0.3;
        let base_cfg = self.known_cfg(0.11, 8, 4);
        let base = sim::run_experiment(&base_cfg)?;
        let mut c = base_cfg;
        c.randomize_alpha = alpha;
        let r = sim::run_experiment(&c)?;
        let ratio = r.mean_t / base.mean_t;
        let predicted = alpha + (1.0 - alpha) * base.error_rate;
        let ok_t = (ratio / (1.0 - alpha) - 1.0).abs() <= 0.02;
        let ok_e = r.error_ci.contains(predicted);
        Ok((ok_t && ok_e, format!("T ratio {ratio:.4} (target 0.7), error {:.4} vs {predicted:.4} CI [{:.4}, {:.4}]", r.error_rate, r.error_ci.lo, r.error_ci.hi)))
    }

    fn converse(&mut self) -> VResult<(bool, String)> {
        let mut reports = self.known_reports()?;
        if !self.quick() {
            reports.push(self.universal_report()?);
        }
        let mut violations = 0;
        let mut closest = f64::INFINITY;
        for r in &reports {
            let bound = bounds::converse_rate(r.capacity_bits, r.log2_m, r.epsilon.unwrap())?;
            let rate = r.empirical_rate.unwrap_or(0.0);
            closest = closest.min(bound - rate);
            if rate > bound {
                violations += 1;
            }
        }
        Ok((violations == 0, format!("{} rates, {violations} violations, min margin {closest:.4}", reports.len())))
    }

    fn joint_sc(&mut self) -> VResult<(bool, String)> {
        let mut c = self.base(Scheme::JointSc, ChannelSpec::Noiseless { size: 2 }, 10_000);
        c.source = Some(SourceSpec::Zipf { m: 1 << 10, exponent: 1.0 });
        c.epsilon = Some(1.0 / 64.0);
        let r = sim::run_experiment(&c)?;
        let bound = r.bound("joint_sc_expected_time").unwrap_or(f64::NAN);
        let pass = r.mean_t <= bound + r.mean_t_half_width() && r.error_ci.hi <= 1.0 / 64.0;
        Ok((
            pass,
            format!(
                "H={:.3}, mean_T={:.3}±{:.3} vs {bound:.3}, err_hi={:.5}",
                r.extra("source_entropy_bits").unwrap_or(f64::NAN),
                r.mean_t,
                r.mean_t_half_width(),
                r.error_ci.hi
            ),
        ))
    }

    fn slepian_wolf(&mut self) -> VResult<(bool, String)> {
        let eps = 1.0 / 16.0;
        let mut c = self.base(Scheme::SlepianWolf, ChannelSpec::Noiseless { size: 2 }, 10_000);
        c.source = Some(SourceSpec::XorPair { bits: 6, flip: 0.2 });
        c.epsilon = Some(eps);
        let r = sim::run_slepian_wolf(&c)?;
        let e = |k: &str| r.extra(k).unwrap_or(f64::NAN);
        let slack = 1.0 - (eps / 2.0).log2();
        let (b1, b2) = (e("h1") + slack, e("h2_given_1") + slack);
        let ok1 = e("mean_t1") <= b1 + e("mean_t1_ci_half");
        let ok2 = e("mean_t2") <= b2 + e("mean_t2_ci_half");
        let ok_e = r.error_ci.hi <= eps;
        Ok((
            ok1 && ok2 && ok_e && e("h2_given_1") >= 4.0,
            format!(
                "R1={:.3} vs {b1:.3}, R2={:.3} vs {b2:.3}, err_hi={:.4}",
                e("mean_t1"),
                e("mean_t2"),
                r.error_ci.hi
            ),
        ))
    }

    fn complete_universal(&mut self) -> VResult<(bool, String)> {
        let mut c = self.base(Scheme::CompleteUniversal, ChannelSpec::Bsc { p: 0.25 }, 2_000);
        c.source = Some(SourceSpec::Iid { gamma: vec![0.3, 0.7], block_len: 12 });
        c.epsilon = Some(1.0 / 16.0);
        let r = sim::run_experiment(&c)?;
        let hi = r.bound("rate_complete_universal_residual0").unwrap_or(f64::NAN);
        let lo = r.bound("rate_complete_universal_residual2").unwrap_or(f64::NAN);
        let rate = r.empirical_rate.unwrap_or(0.0);
        let pass = r.error_ci.hi <= 1.0 / 16.0 && rate >= lo.min(hi) - r.rate_lower_margin() && r.truncations == 0;
        Ok((pass, format!("err_hi={:.4}, R={rate:.4}±{:.4}, band [{lo:.4}, {hi:.4}]", r.error_ci.hi, r.rate_lower_margin())))
    }

    fn feedback(&mut self) -> VResult<(bool, String)> {
        let c = {
            self.known_cfg(0.25, 8, 4)
        };
        let cmp = run_feedback_comparison(&c, &[1, 2, 8])?;
        let mut pass = cmp.violations.iter().all(|&v| v == 0);
        let mut parts = Vec::new();
        for (&s, r) in cmp.periods.iter().zip(&cmp.reports) {
            let bound = bounds::rate_limited_feedback(r.capacity_bits, r.log2_m, r.epsilon.unwrap(), s as f64)?;
            let rate = r.empirical_rate.unwrap_or(0.0);
            let ok = rate >= bound - r.rate_lower_margin();
            pass &= ok;
            parts.push(format!("s={s}: R={rate:.4}±{:.4} vs {bound:.4}", r.rate_lower_margin()));
        }
        Ok((pass, format!("violations {:?}; {}", cmp.violations, parts.join("; "))))
    }

    fn determinism(&mut self) -> VResult<(bool, String)> {
        let mut c = self.known_cfg(0.25, 8, 4);
        c.trials = self.scaled(10_000, 1_000);
        c.workers = 1;
        let a = sim::run_experiment(&c)?.to_json();
        c.workers = 4;
        let b = sim::run_experiment(&c)?.to_json();
        Ok((a == b, format!("{} report bytes, identical: {}", a.len(), a == b)))
    }
}

