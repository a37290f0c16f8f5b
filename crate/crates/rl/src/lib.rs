//! PPO on a synthetic embedding-observed reach task, with optional
//! completion-sense reward shaping.

pub mod ablation;
pub mod env;
pub mod evaluate;
pub mod gae;
pub mod nn;
pub mod policy;
pub mod ppo;
pub mod shaping;
pub mod train;
pub mod vec_env;

use thiserror::Error;

pub use ablation::{ablation_run, AblationParam, AblationRun};
pub use env::{EnvError, FeatureMap, ReachEnv, ReachEnvConfig, StepOutcome};
pub use evaluate::{evaluate, EvalResult};
pub use gae::compute_gae;
pub use policy::ActorCritic;
pub use ppo::{ppo_update, Batch, PpoConfig, PpoError, UpdateStats};
pub use shaping::{Combination, ShapedEnv, ShapedStep, ShapingConfig};
pub use train::{train, RewardSetting, TrainConfig, TrainMetrics, TrainingLog};
pub use vec_env::VecEnv;

#[derive(Debug, Error)]
pub enum RlError {
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Ppo(#[from] PpoError),
    #[error(transparent)]
    Reward(#[from] reward_zero::RewardError),
    #[error(transparent)]
    Potential(#[from] reward_zero::potential::PotentialError),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("log i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("log format: {0}")]
    Csv(#[from] csv::Error),
}
