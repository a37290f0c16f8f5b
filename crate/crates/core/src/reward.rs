//! The completion-sense reward.
//!
//! ```text
//! σ(Φ)  = 1 / (1 + exp(−k (Φ − τ)))
//! ΔΦ    = max(0, Φ_t − Φ_{t−1})
//! R     = r_base + β · σ(Φ_t) · (1 + ΔΦ)
//! ```
//!
//! `r_base` is either `Φ_t` itself or the potential difference
//! `Φ_t − Φ_{t−1}` (the default, which telescopes over an episode).

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Sigmoid centre: the potential at which the agent counts as near completion.
pub const DEFAULT_TAU: f64 = 0.7;
/// Sigmoid steepness.
pub const DEFAULT_K: f64 = 10.0;
/// Completion-bonus weight used for online shaping.
pub const DEFAULT_BETA: f64 = 0.1;
/// Completion-bonus weight suggested for general manipulation scenarios.
pub const MANIPULATION_BETA: f64 = 0.5;
/// Environment steps between potential recomputations.
pub const DEFAULT_INTERVAL: u64 = 25;

/// Beyond this the logistic is saturated to exactly 0 or 1.
const SATURATION: f64 = 700.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RewardError {
    #[error("invalid reward configuration: {0}")]
    InvalidConfig(String),
    #[error("step {step} requires a fresh potential but none was supplied")]
    MissingPotential { step: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActivationConfig {
    pub tau: f64,
    pub k: f64,
}

impl ActivationConfig {
    pub fn validate(&self) -> Result<(), RewardError> {
        if !(self.k.is_finite() && self.k > 0.0) {
            return Err(RewardError::InvalidConfig(format!(
                "steepness k must be positive, got {}",
                self.k
            )));
        }
        if !(self.tau > -1.0 && self.tau < 1.0) {
            return Err(RewardError::InvalidConfig(format!(
                "threshold tau must lie in (-1, 1), got {}",
                self.tau
            )));
        }
        Ok(())
    }
}

impl Default for ActivationConfig {
    fn default() -> Self {
        Self {
            tau: DEFAULT_TAU,
            k: DEFAULT_K,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseMode {
    /// `r_base = Φ_t`
    PotentialValue,
    /// `r_base = Φ_t − Φ_{t−1}`
    PotentialDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardConfig {
    pub activation: ActivationConfig,
    pub beta: f64,
    pub base_mode: BaseMode,
    pub invocation_interval: u64,
}

impl RewardConfig {
    pub fn validate(&self) -> Result<(), RewardError> {
        self.activation.validate()?;
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(RewardError::InvalidConfig(format!(
                "beta must be nonnegative, got {}",
                self.beta
            )));
        }
        if self.invocation_interval == 0 {
            return Err(RewardError::InvalidConfig(
                "invocation interval must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_interval(mut self, interval: u64) -> Self {
        self.invocation_interval = interval;
        self
    }
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            activation: ActivationConfig::default(),
            beta: DEFAULT_BETA,
            base_mode: BaseMode::PotentialDifference,
            invocation_interval: DEFAULT_INTERVAL,
        }
    }
}

/// Every term of one reward evaluation.
///
/// `total == base + bonus_weight * activation * (1 + progress)`; `bonus_weight`
/// is the β that was actually applied, which is zero on steps where the
/// tracker holds a cached potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub base: f64,
    pub activation: f64,
    pub progress: f64,
    pub total: f64,
    pub phi: f64,
    pub bonus_weight: f64,
}

impl RewardBreakdown {
    /// The shaping bonus on top of `base`.
    pub fn bonus(&self) -> f64 {
        self.total - self.base
    }
}

/// Logistic completion activation, saturating instead of overflowing.
pub fn activation(phi: f64, cfg: &ActivationConfig) -> f64 {
    let z = cfg.k * (phi - cfg.tau);
    if z > SATURATION {
        1.0
    } else if z < -SATURATION {
        0.0
    } else {
        1.0 / (1.0 + (-z).exp())
    }
}

pub fn progress_delta(phi_t: f64, phi_prev: f64) -> f64 {
    (phi_t - phi_prev).max(0.0)
}

pub fn completion_reward(phi_t: f64, phi_prev: f64, cfg: &RewardConfig) -> RewardBreakdown {
    let base = match cfg.base_mode {
        BaseMode::PotentialValue => phi_t,
        BaseMode::PotentialDifference => phi_t - phi_prev,
    };
    let progress = progress_delta(phi_t, phi_prev);
    let act = activation(phi_t, &cfg.activation);
    RewardBreakdown {
        base,
        activation: act,
        progress,
        total: base + cfg.beta * act * (1.0 + progress),
        phi: phi_t,
        bonus_weight: cfg.beta,
    }
}
