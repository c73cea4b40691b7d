//! Grid evaluation of the closed-form bounds, for rate-versus-M style tables.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::*;
use crate::channel::ChannelSpec;
use crate::ExtendedFloat;

/// Every formula a sweep can tabulate. Names are the CSV column headers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundFormula {
    RateKnown,
    RateKnownRandomized,
    ExpectedTimeKnown,
    ErrorExponentKnown,
    ConverseRate,
    BurnashevExponent,
    RateUniversal,
    RateUniversalRandomized,
    ExpectedTimeUniversal,
    /// `rate_known - rate_universal`.
    UniversalPenalty,
    /// `(|X||Y|/2)·C·log2 log2 M / log2 M`.
    UniversalPenaltyLeading,
    RateLimitedFeedback,
    JointScExpectedTime,
    JointScRate,
    RateJointUniversal,
    SlepianWolfR1,
    SlepianWolfR2,
    SlepianWolfSum,
    RateCompleteUniversal,
}

impl BoundFormula {
    pub const ALL: [BoundFormula; 19] = [
        BoundFormula::RateKnown,
        BoundFormula::RateKnownRandomized,
        BoundFormula::ExpectedTimeKnown,
        BoundFormula::ErrorExponentKnown,
        BoundFormula::ConverseRate,
        BoundFormula::BurnashevExponent,
        BoundFormula::RateUniversal,
        BoundFormula::RateUniversalRandomized,
        BoundFormula::ExpectedTimeUniversal,
        BoundFormula::UniversalPenalty,
        BoundFormula::UniversalPenaltyLeading,
        BoundFormula::RateLimitedFeedback,
        BoundFormula::JointScExpectedTime,
        BoundFormula::JointScRate,
        BoundFormula::RateJointUniversal,
        BoundFormula::SlepianWolfR1,
        BoundFormula::SlepianWolfR2,
        BoundFormula::SlepianWolfSum,
        BoundFormula::RateCompleteUniversal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundFormula::RateKnown => "rate_known",
            BoundFormula::RateKnownRandomized => "rate_known_randomized",
            BoundFormula::ExpectedTimeKnown => "expected_time_known",
            BoundFormula::ErrorExponentKnown => "error_exponent_known",
            BoundFormula::ConverseRate => "converse_rate",
            BoundFormula::BurnashevExponent => "burnashev_exponent",
            BoundFormula::RateUniversal => "rate_universal",
            BoundFormula::RateUniversalRandomized => "rate_universal_randomized",
            BoundFormula::ExpectedTimeUniversal => "expected_time_universal",
            BoundFormula::UniversalPenalty => "universal_penalty",
            BoundFormula::UniversalPenaltyLeading => "universal_penalty_leading",
            BoundFormula::RateLimitedFeedback => "rate_limited_feedback",
            BoundFormula::JointScExpectedTime => "joint_sc_expected_time",
            BoundFormula::JointScRate => "joint_sc_rate",
            BoundFormula::RateJointUniversal => "rate_joint_universal",
            BoundFormula::SlepianWolfR1 => "slepian_wolf_r1",
            BoundFormula::SlepianWolfR2 => "slepian_wolf_r2",
            BoundFormula::SlepianWolfSum => "slepian_wolf_sum",
            BoundFormula::RateCompleteUniversal => "rate_complete_universal",
        }
    }
}

/// Named scalar inputs. Unset fields are only an error for formulas that need them.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundParams {
    pub capacity: Option<f64>,
    pub log2_m: Option<f64>,
    pub epsilon: Option<f64>,
    pub x_size: Option<usize>,
    pub y_size: Option<usize>,
    pub feedback_period: Option<f64>,
    pub delta: Option<f64>,
    /// Operating rate for exponent formulas; defaults to `rate_known`.
    pub rate: Option<f64>,
    pub entropy_bits: Option<f64>,
    pub per_bit_entropy: Option<f64>,
    pub h1: Option<f64>,
    pub h2_given_1: Option<f64>,
    pub source_alphabet: Option<usize>,
    pub block_len: Option<f64>,
    pub residual: Option<f64>,
}

impl BoundParams {
    pub const VARIABLES: [&'static str; 15] = [
        "capacity",
        "log2_m",
        "epsilon",
        "x_size",
        "y_size",
        "feedback_period",
        "delta",
        "rate",
        "entropy_bits",
        "per_bit_entropy",
        "h1",
        "h2_given_1",
        "source_alphabet",
        "block_len",
        "residual",
    ];

    pub fn set(&mut self, name: &str, v: f64) -> Result<()> {
        let as_size = |v: f64| Some(v.round().max(0.0) as usize);
        match name {
            "capacity" => self.capacity = Some(v),
            "log2_m" => self.log2_m = Some(v),
            "epsilon" => self.epsilon = Some(v),
            "x_size" => self.x_size = as_size(v),
            "y_size" => self.y_size = as_size(v),
            "feedback_period" => self.feedback_period = Some(v),
            "delta" => self.delta = Some(v),
            "rate" => self.rate = Some(v),
            "entropy_bits" => self.entropy_bits = Some(v),
            "per_bit_entropy" => self.per_bit_entropy = Some(v),
            "h1" => self.h1 = Some(v),
            "h2_given_1" => self.h2_given_1 = Some(v),
            "source_alphabet" => self.source_alphabet = as_size(v),
            "block_len" => self.block_len = Some(v),
            "residual" => self.residual = Some(v),
            other => return Err(BoundsError::UnknownVariable(other.to_string())),
        }
        Ok(())
    }
}

fn need<V: Copy>(v: Option<V>, name: &'static str) -> Result<V> {
    v.ok_or(BoundsError::MissingParameter(name))
}

/// Evaluates one formula at `T` precision and widens the result to `f64`.
/// `channel` is only consulted by [`BoundFormula::BurnashevExponent`].
pub fn evaluate<T: Real>(formula: BoundFormula, p: &BoundParams, channel: Option<&Dmc>) -> Result<f64> {
    let t = |v: f64| T::lit(v);
    let c = || need(p.capacity, "capacity").map(t);
    let k = || need(p.log2_m, "log2_m").map(t);
    let eps = || need(p.epsilon, "epsilon").map(t);
    let xs = || need(p.x_size, "x_size");
    let ys = || need(p.y_size, "y_size");
    let value: T = match formula {
        BoundFormula::RateKnown => rate_known(c()?, k()?, eps()?)?,
        BoundFormula::RateKnownRandomized => rate_known_randomized(c()?, k()?, eps()?)?,
        BoundFormula::ExpectedTimeKnown => expected_time_known(c()?, k()?, eps()?)?,
        BoundFormula::ErrorExponentKnown => {
            let r = match p.rate {
                Some(r) => t(r),
                None => rate_known(c()?, k()?, eps()?)?,
            };
            error_exponent_known(c()?, r, k()?)?
        }
        BoundFormula::ConverseRate => converse_rate(c()?, k()?, eps()?)?,
        BoundFormula::BurnashevExponent => {
            let dmc = channel.ok_or(BoundsError::MissingParameter("channel"))?;
            let cap = need(p.capacity, "capacity")?;
            let r = need(p.rate, "rate")?;
            t(burnashev_exponent(dmc, cap, r)?.exponent)
        }
        BoundFormula::RateUniversal => rate_universal(c()?, k()?, eps()?, xs()?, ys()?)?,
        BoundFormula::RateUniversalRandomized => match p.delta {
            Some(d) => rate_universal_randomized(c()?, k()?, eps()?, t(d), xs()?, ys()?)?,
            None => {
                let (cap, km, e) = (need(p.capacity, "capacity")?, need(p.log2_m, "log2_m")?, need(p.epsilon, "epsilon")?);
                t(optimize_universal_delta(cap, km, e, xs()?, ys()?)?.1)
            }
        },
        BoundFormula::ExpectedTimeUniversal => expected_time_universal(c()?, k()?, eps()?, xs()?, ys()?)?,
        BoundFormula::UniversalPenalty => {
            rate_known(c()?, k()?, eps()?)? - rate_universal(c()?, k()?, eps()?, xs()?, ys()?)?
        }
        BoundFormula::UniversalPenaltyLeading => {
            let (km, cap) = (k()?, c()?);
            check_log_m(km)?;
            t((xs()? * ys()?) as f64 / 2.0) * cap * km.log2() / km
        }
        BoundFormula::RateLimitedFeedback => {
            rate_limited_feedback(c()?, k()?, eps()?, t(need(p.feedback_period, "feedback_period")?))?
        }
        BoundFormula::JointScExpectedTime => {
            joint_sc_expected_time(t(need(p.entropy_bits, "entropy_bits")?), c()?, eps()?)?
        }
        BoundFormula::JointScRate => joint_sc_rate(c()?, k()?, eps()?, t(need(p.per_bit_entropy, "per_bit_entropy")?))?,
        BoundFormula::RateJointUniversal => {
            rate_joint_universal(c()?, k()?, eps()?, t(need(p.per_bit_entropy, "per_bit_entropy")?), xs()?, ys()?)?
        }
        BoundFormula::SlepianWolfR1 | BoundFormula::SlepianWolfR2 | BoundFormula::SlepianWolfSum => {
            let sw = slepian_wolf_rates(t(need(p.h1, "h1")?), t(need(p.h2_given_1, "h2_given_1")?), eps()?)?;
            match formula {
                BoundFormula::SlepianWolfR1 => sw.r1,
                BoundFormula::SlepianWolfR2 => sw.r2,
                _ => sw.sum,
            }
        }
        BoundFormula::RateCompleteUniversal => rate_complete_universal(
            c()?,
            k()?,
            eps()?,
            xs()?,
            ys()?,
            t(need(p.per_bit_entropy, "per_bit_entropy")?),
            need(p.source_alphabet, "source_alphabet")?,
            t(need(p.block_len, "block_len")?),
            t(p.residual.unwrap_or(0.0)),
        )?,
    };
    Ok(value.to_f64_lossy())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Linear,
    /// Geometric spacing between `start` and `stop`.
    Log,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub variable: String,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
    #[serde(default)]
    pub scale: Scale,
}

impl SweepAxis {
    pub fn points(&self) -> Result<Vec<f64>> {
        if !BoundParams::VARIABLES.contains(&self.variable.as_str()) {
            return Err(BoundsError::UnknownVariable(self.variable.clone()));
        }
        if !self.start.is_finite() || !self.stop.is_finite() {
            return Err(BoundsError::BadAxis("start and stop must be finite".into()));
        }
        if self.scale == Scale::Log && (self.start <= 0.0 || self.stop <= 0.0) {
            return Err(BoundsError::BadAxis("log scale needs positive endpoints".into()));
        }
        Ok((0..self.steps)
            .map(|i| {
                if self.steps == 1 {
                    return self.start;
                }
                // Weighted endpoints keep integer grids (and power-of-two log grids) exact.
                let n = (self.steps - 1) as f64;
                let (i, j) = ((self.steps - 1 - i) as f64, i as f64);
                match self.scale {
                    Scale::Linear => (i * self.start + j * self.stop) / n,
                    Scale::Log => ((i * self.start.log2() + j * self.stop.log2()) / n).exp2(),
                }
            })
            .collect())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    F64,
    Extended,
}

/// Optional Monte Carlo column: runs the known-channel decoder at each grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateOptions {
    pub trials: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub workers: Option<usize>,
}

/// JSON sweep description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Single formula shorthand.
    #[serde(default)]
    pub formula: Option<BoundFormula>,
    #[serde(default)]
    pub formulas: Vec<BoundFormula>,
    #[serde(default)]
    pub fixed: BoundParams,
    /// Fills `capacity`, `x_size` and `y_size` when they are not fixed explicitly.
    #[serde(default)]
    pub channel: Option<ChannelSpec>,
    pub sweep: SweepAxis,
    #[serde(default)]
    pub precision: Precision,
    #[serde(default)]
    pub simulate: Option<SimulateOptions>,
}

impl SweepSpec {
    pub fn formula_list(&self) -> Vec<BoundFormula> {
        let mut out: Vec<BoundFormula> = self.formula.into_iter().collect();
        for f in &self.formulas {
            if !out.contains(f) {
                out.push(*f);
            }
        }
        out
    }

    /// Fixed parameters with channel-derived defaults filled in.
    pub fn resolved_params(&self) -> std::result::Result<(BoundParams, Option<Dmc>), crate::channel::ChannelError> {
        let mut p = self.fixed.clone();
        let mut dmc = None;
        if let Some(spec) = &self.channel {
            let model = spec.build()?;
            let (cap, _) = model.capacity()?;
            p.capacity.get_or_insert(cap);
            if let Some(d) = model.as_discrete() {
                p.x_size.get_or_insert(d.input_size());
                p.y_size.get_or_insert(d.output_size());
                dmc = Some(d.clone());
            }
        }
        Ok((p, dmc))
    }
}

/// Evaluated grid. Cells are `None` where the formula's domain excludes the point.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl SweepTable {
    /// Evaluates every formula at every grid point. Missing inputs and bad axes are
    /// errors; domain violations at individual points leave empty cells.
    pub fn evaluate(
        formulas: &[BoundFormula],
        fixed: &BoundParams,
        axis: &SweepAxis,
        channel: Option<&Dmc>,
        precision: Precision,
    ) -> Result<Self> {
        let points = axis.points()?;
        let mut columns = vec![axis.variable.clone()];
        columns.extend(formulas.iter().map(|f| f.name().to_string()));
        let mut rows = Vec::with_capacity(points.len());
        for &v in &points {
            let mut p = fixed.clone();
            p.set(&axis.variable, v)?;
            let mut row = vec![Some(v)];
            for &f in formulas {
                let r = match precision {
                    Precision::F64 => evaluate::<f64>(f, &p, channel),
                    Precision::Extended => evaluate::<ExtendedFloat>(f, &p, channel),
                };
                match r {
                    Ok(x) => row.push(Some(x)),
                    Err(e @ (BoundsError::MissingParameter(_) | BoundsError::UnknownVariable(_))) => return Err(e),
                    Err(_) => row.push(None),
                }
            }
            rows.push(row);
        }
        Ok(Self { columns, rows })
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// Appends a column computed per row.
    pub fn push_column(&mut self, name: &str, values: Vec<Option<f64>>) {
        self.columns.push(name.to_string());
        for (row, v) in self.rows.iter_mut().zip(values) {
            row.push(v);
        }
    }

    /// Comma-separated, header first, empty cell for undefined values.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.map(|v| format!("{v}")).unwrap_or_default()))?;
        }
        w.flush()?;
        Ok(())
    }
}
