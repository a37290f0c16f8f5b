//! Online completion-sense shaping around the reach environment.
//!
//! At reset the first observation becomes the episode baseline and
//! `Φ_0 = Φ(o_0)` seeds the tracker. Step `t` (zero-based) moves the
//! environment to `o_{t+1}`; when `t % interval == 0` the wrapper evaluates
//! `Φ(o_{t+1})` against the fixed goal embedding and that baseline and feeds
//! it to the tracker. Other steps receive no shaping term.

use reward_zero::{clip_potential, EmbeddingVector, PotentialConfig, RewardBreakdown, RewardConfig, RewardTracker};
use serde::{Deserialize, Serialize};

use crate::env::{ReachEnv, StepOutcome};
use crate::RlError;

/// How the shaping term meets the environment reward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Combination {
    /// `env_reward + shaping`
    Additive,
    /// `shaping` alone
    Replace,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapingConfig {
    pub reward: RewardConfig,
    pub potential: PotentialConfig,
    pub combination: Combination,
}

impl Default for ShapingConfig {
    fn default() -> Self {
        Self {
            reward: RewardConfig::default(),
            potential: PotentialConfig::default(),
            combination: Combination::Additive,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapedStep {
    pub outcome: StepOutcome,
    pub shaped_reward: f64,
    /// Tracker output for this step; `None` without shaping.
    pub breakdown: Option<RewardBreakdown>,
}

#[derive(Debug, Clone)]
struct Shaper {
    cfg: ShapingConfig,
    goal: EmbeddingVector,
    baseline: EmbeddingVector,
    tracker: RewardTracker,
    evaluations: u64,
}

impl Shaper {
    fn potential(&self, obs: &EmbeddingVector) -> Result<f64, RlError> {
        Ok(clip_potential(obs, &self.goal, &self.baseline, &self.cfg.potential)?)
    }
}

#[derive(Debug, Clone)]
pub struct ShapedEnv {
    env: ReachEnv,
    shaper: Option<Shaper>,
}

fn embedding(obs: &[f64]) -> Result<EmbeddingVector, RlError> {
    let v = EmbeddingVector::new(obs.to_vec()).map_err(reward_zero::potential::PotentialError::from)?;
    Ok(v)
}

impl ShapedEnv {
    /// Environment reward only; no potentials are ever computed.
    pub fn sparse(env: ReachEnv) -> Self {
        Self { env, shaper: None }
    }

    /// Shapes toward the environment's own noise-free goal embedding.
    pub fn shaped(env: ReachEnv, cfg: ShapingConfig) -> Result<Self, RlError> {
        let goal = env.goal_embedding().clone();
        Self::with_goal(env, cfg, goal)
    }

    pub fn with_goal(env: ReachEnv, cfg: ShapingConfig, goal: EmbeddingVector) -> Result<Self, RlError> {
        cfg.reward.validate()?;
        cfg.potential.validate()?;
        let tracker = RewardTracker::new(cfg.reward, 0.0)?;
        Ok(Self {
            shaper: Some(Shaper {
                cfg,
                baseline: goal.clone(),
                goal,
                tracker,
                evaluations: 0,
            }),
            env,
        })
    }

    pub fn env(&self) -> &ReachEnv {
        &self.env
    }

    pub fn is_shaped(&self) -> bool {
        self.shaper.is_some()
    }

    /// Potentials consumed by the tracker over the wrapper's lifetime. The
    /// baseline potential taken at each reset is not counted.
    pub fn potential_evaluations(&self) -> u64 {
        self.shaper.as_ref().map_or(0, |s| s.evaluations)
    }

    /// Current cached potential, if shaping is on.
    pub fn cached_potential(&self) -> Option<f64> {
        self.shaper.as_ref().map(|s| s.tracker.cached_phi())
    }

    pub fn reset(&mut self, seed: Option<u64>) -> Result<Vec<f64>, RlError> {
        let obs = self.env.reset(seed);
        self.start_episode(&obs)?;
        Ok(obs)
    }

    pub fn reset_at(&mut self, position: [f64; 2]) -> Result<Vec<f64>, RlError> {
        let obs = self.env.reset_at(position);
        self.start_episode(&obs)?;
        Ok(obs)
    }

    fn start_episode(&mut self, obs: &[f64]) -> Result<(), RlError> {
        if let Some(s) = self.shaper.as_mut() {
            s.baseline = embedding(obs)?;
            let phi_0 = s.potential(&s.baseline)?;
            s.tracker.reset(phi_0);
        }
        Ok(())
    }

    pub fn step(&mut self, action: [f64; 2]) -> Result<ShapedStep, RlError> {
        let t = u64::from(self.env.steps());
        let outcome = self.env.step(action)?;
        let Some(s) = self.shaper.as_mut() else {
            return Ok(ShapedStep {
                shaped_reward: outcome.env_reward,
                outcome,
                breakdown: None,
            });
        };
        let phi = if s.tracker.is_recompute_step(t) {
            s.evaluations += 1;
            Some(s.potential(&embedding(&outcome.observation)?)?)
        } else {
            None
        };
        let breakdown = s.tracker.step(phi, t)?;
        let shaped_reward = match s.cfg.combination {
            Combination::Additive => outcome.env_reward + breakdown.total,
            Combination::Replace => breakdown.total,
        };
        Ok(ShapedStep {
            outcome,
            shaped_reward,
            breakdown: Some(breakdown),
        })
    }
}
