use serde::{Deserialize, Serialize};

use super::{capacity, AwgnChannel, ChannelError, Dmc, InputPrior, DEFAULT_MAX_ITERS, DEFAULT_TOLERANCE_BITS};

/// JSON channel description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ChannelSpec {
    Dmc { forward: Vec<Vec<f64>> },
    Awgn { signal_power: f64, noise_variance: f64 },
    Bsc { p: f64 },
    Bec { delta: f64 },
    Z { p: f64 },
    Noiseless { size: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub enum ChannelModel {
    Discrete(Dmc),
    Gaussian(AwgnChannel),
}

impl ChannelSpec {
    pub fn build(&self) -> Result<ChannelModel, ChannelError> {
        Ok(match *self {
            ChannelSpec::Dmc { ref forward } => ChannelModel::Discrete(Dmc::new(forward.clone())?),
            ChannelSpec::Awgn { signal_power, noise_variance } => {
                ChannelModel::Gaussian(AwgnChannel::new(signal_power, noise_variance)?)
            }
            ChannelSpec::Bsc { p } => ChannelModel::Discrete(Dmc::bsc(p)?),
            ChannelSpec::Bec { delta } => ChannelModel::Discrete(Dmc::bec(delta)?),
            ChannelSpec::Z { p } => ChannelModel::Discrete(Dmc::z_channel(p)?),
            ChannelSpec::Noiseless { size } => {
                if size < 2 {
                    return Err(ChannelError::BadParameter("noiseless channel needs at least 2 symbols".into()));
                }
                ChannelModel::Discrete(Dmc::noiseless(size)?)
            }
        })
    }
}

impl ChannelModel {
    /// Capacity in bits and, for discrete channels, the capacity-achieving prior.
    pub fn capacity(&self) -> Result<(f64, Option<InputPrior>), ChannelError> {
        match self {
            ChannelModel::Discrete(dmc) => {
                let r = capacity(dmc, DEFAULT_TOLERANCE_BITS, DEFAULT_MAX_ITERS)?;
                Ok((r.capacity_bits, Some(r.optimal_prior)))
            }
            ChannelModel::Gaussian(ch) => Ok((ch.capacity_bits(), None)),
        }
    }

    pub fn as_discrete(&self) -> Option<&Dmc> {
        match self {
            ChannelModel::Discrete(d) => Some(d),
            ChannelModel::Gaussian(_) => None,
        }
    }
}
