//! Confidence intervals used by reports.

use serde::{Deserialize, Serialize};

/// Two-sided normal quantile for 95% coverage.
pub const Z95: f64 = 1.959_963_984_540_054;
/// Two-sided normal quantile for 99% coverage.
pub const Z99: f64 = 2.575_829_303_548_901;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn half_width(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

/// Wilson score interval for `successes` out of `n` Bernoulli trials.
pub fn wilson_interval(successes: u64, n: u64, z: f64) -> Interval {
    if n == 0 {
        return Interval { lo: 0.0, hi: 1.0 };
    }
    let (k, n) = (successes, n);
    let total = n;
    let n = n as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    // The endpoints are exact at the boundaries; keep rounding from leaking in.
    let lo = if k == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if k == total { 1.0 } else { (center + half).min(1.0) };
    Interval { lo, hi }
}

/// Exact first and second moments of integer samples.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IntegerMoments {
    pub n: u64,
    pub sum: u128,
    pub sum_sq: u128,
}

impl IntegerMoments {
    pub fn push(&mut self, v: u64) {
        self.n += 1;
        self.sum += v as u128;
        self.sum_sq += (v as u128) * (v as u128);
    }

    pub fn mean(&self) -> f64 {
        if self.n == 0 {
            return f64::NAN;
        }
        self.sum as f64 / self.n as f64
    }

    /// Unbiased sample standard deviation; 0 for fewer than two samples.
    pub fn std_dev(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as u128;
        // n·Σv² - (Σv)² is exact in integers
        let num = n * self.sum_sq - self.sum * self.sum;
        (num as f64 / (self.n as f64 * (self.n - 1) as f64)).sqrt()
    }

    /// Normal-approximation interval for the mean.
    pub fn mean_interval(&self, z: f64) -> Interval {
        let m = self.mean();
        let half = if self.n >= 2 { z * self.std_dev() / (self.n as f64).sqrt() } else { f64::INFINITY };
        Interval { lo: m - half, hi: m + half }
    }
}

impl Extend<u64> for IntegerMoments {
    fn extend<I: IntoIterator<Item = u64>>(&mut self, iter: I) {
        for v in iter {
            self.push(v);
        }
    }
}
