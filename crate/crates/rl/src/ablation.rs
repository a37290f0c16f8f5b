//! Sweeps of one shaping parameter with everything else held fixed.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::train::{train, RewardSetting, TrainConfig, TrainingLog};
use crate::RlError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AblationParam {
    Beta,
    Interval,
}

impl FromStr for AblationParam {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "beta" => Ok(Self::Beta),
            "interval" => Ok(Self::Interval),
            other => Err(format!("unknown ablation parameter `{other}` (expected beta or interval)")),
        }
    }
}

impl fmt::Display for AblationParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Beta => "beta",
            Self::Interval => "interval",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationRun {
    pub value: f64,
    pub config: TrainConfig,
    pub log: TrainingLog,
}

/// The base config with `param` set to `value`.
pub fn ablation_config(base: &TrainConfig, param: AblationParam, value: f64) -> Result<TrainConfig, RlError> {
    let RewardSetting::Zero(mut shaping) = base.reward else {
        return Err(RlError::InvalidConfig("ablations need the shaped reward setting".into()));
    };
    match param {
        AblationParam::Beta => shaping.reward.beta = value,
        AblationParam::Interval => {
            if !(value >= 1.0 && value.fract() == 0.0 && value <= u64::MAX as f64) {
                return Err(RlError::InvalidConfig(format!("interval must be a positive integer, got {value}")));
            }
            shaping.reward.invocation_interval = value as u64;
        }
    }
    let cfg = TrainConfig {
        reward: RewardSetting::Zero(shaping),
        ..base.clone()
    };
    cfg.validate()?;
    Ok(cfg)
}

/// One training run per value, all sharing the base config's seed.
pub fn ablation_run(base: &TrainConfig, param: AblationParam, values: &[f64]) -> Result<Vec<AblationRun>, RlError> {
    if values.is_empty() {
        return Err(RlError::InvalidConfig("ablation needs at least one value".into()));
    }
    let configs = values
        .iter()
        .map(|&v| ablation_config(base, param, v))
        .collect::<Result<Vec<_>, _>>()?;
    values
        .iter()
        .zip(configs)
        .map(|(&value, config)| {
            let log = train(&config)?;
            Ok(AblationRun { value, config, log })
        })
        .collect()
}
