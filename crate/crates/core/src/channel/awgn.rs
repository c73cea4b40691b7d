use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::ChannelError;

/// `Y = X + V` with `V ~ N(0, noise_variance)` and Gaussian codebooks of power `signal_power`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AwgnChannel {
    signal_power: f64,
    noise_variance: f64,
}

impl AwgnChannel {
    pub fn new(signal_power: f64, noise_variance: f64) -> Result<Self, ChannelError> {
        for (name, v) in [("signal_power", signal_power), ("noise_variance", noise_variance)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ChannelError::BadParameter(format!("{name} = {v} must be positive and finite")));
            }
        }
        Ok(Self { signal_power, noise_variance })
    }

    pub fn signal_power(&self) -> f64 {
        self.signal_power
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    /// `½ log2(1 + P/θ)` bits per use.
    pub fn capacity_bits(&self) -> f64 {
        0.5 * (1.0 + self.signal_power / self.noise_variance).log2()
    }

    /// Coefficient of `y` in the posterior mean of `x`.
    pub fn posterior_gain(&self) -> f64 {
        self.signal_power / (self.signal_power + self.noise_variance)
    }

    pub fn posterior_variance(&self) -> f64 {
        self.signal_power * self.noise_variance / (self.signal_power + self.noise_variance)
    }

    /// `log2 p(x|y) - log2 q(x)` for a Gaussian codebook symbol `x` and output `y`.
    pub fn log_score(&self, x: f64, y: f64) -> f64 {
        let v = self.posterior_variance();
        let p = self.signal_power;
        let d = x - self.posterior_gain() * y;
        let ln_ratio = 0.5 * (p / v).ln() - d * d / (2.0 * v) + x * x / (2.0 * p);
        ln_ratio * std::f64::consts::LOG2_E
    }

    pub fn sample_output<R: Rng + ?Sized>(&self, x: f64, rng: &mut R) -> f64 {
        let n: f64 = StandardNormal.sample(rng);
        x + self.noise_variance.sqrt() * n
    }
}
