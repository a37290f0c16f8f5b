//! Several environments advanced in lockstep with automatic resets.

use crate::shaping::ShapedEnv;
use crate::RlError;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EpisodeSummary {
    pub env_return: f64,
    pub shaped_return: f64,
    pub length: u32,
    pub success: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VecStep {
    /// Observation each policy sees next (a fresh episode's first one after a reset).
    pub observations: Vec<Vec<f64>>,
    pub rewards: Vec<f64>,
    pub env_rewards: Vec<f64>,
    pub dones: Vec<bool>,
    pub truncated: Vec<bool>,
    /// Last observation of episodes that ended on this step.
    pub final_observations: Vec<Option<Vec<f64>>>,
    /// `(env index, summary)` for each episode that ended on this step.
    pub finished: Vec<(usize, EpisodeSummary)>,
}

#[derive(Debug, Clone)]
pub struct VecEnv {
    envs: Vec<ShapedEnv>,
    observations: Vec<Vec<f64>>,
    running: Vec<EpisodeSummary>,
}

impl VecEnv {
    pub fn new(envs: Vec<ShapedEnv>) -> Result<Self, RlError> {
        if envs.is_empty() {
            return Err(RlError::InvalidConfig("a vector env needs at least one environment".into()));
        }
        let n = envs.len();
        Ok(Self {
            envs,
            observations: vec![Vec::new(); n],
            running: vec![EpisodeSummary::default(); n],
        })
    }

    pub fn len(&self) -> usize {
        self.envs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.envs.is_empty()
    }

    pub fn envs(&self) -> &[ShapedEnv] {
        &self.envs
    }

    pub fn observations(&self) -> &[Vec<f64>] {
        &self.observations
    }

    /// Reseeds environment `i` with `seed + i` and starts fresh episodes.
    pub fn reset(&mut self, seed: u64) -> Result<&[Vec<f64>], RlError> {
        for (i, env) in self.envs.iter_mut().enumerate() {
            self.observations[i] = env.reset(Some(seed.wrapping_add(i as u64)))?;
            self.running[i] = EpisodeSummary::default();
        }
        Ok(&self.observations)
    }

    pub fn step(&mut self, actions: &[[f64; 2]]) -> Result<VecStep, RlError> {
        let n = self.envs.len();
        if actions.len() != n {
            return Err(RlError::InvalidConfig(format!("{} actions for {n} environments", actions.len())));
        }
        let mut out = VecStep {
            observations: Vec::with_capacity(n),
            rewards: Vec::with_capacity(n),
            env_rewards: Vec::with_capacity(n),
            dones: Vec::with_capacity(n),
            truncated: Vec::with_capacity(n),
            final_observations: Vec::with_capacity(n),
            finished: Vec::new(),
        };
        for (i, (env, action)) in self.envs.iter_mut().zip(actions).enumerate() {
            let step = env.step(*action)?;
            let ep = &mut self.running[i];
            ep.env_return += step.outcome.env_reward;
            ep.shaped_return += step.shaped_reward;
            ep.length += 1;
            ep.success |= step.outcome.success;
            out.rewards.push(step.shaped_reward);
            out.env_rewards.push(step.outcome.env_reward);
            out.dones.push(step.outcome.done);
            out.truncated.push(step.outcome.truncated);
            if step.outcome.done {
                out.finished.push((i, std::mem::take(ep)));
                out.final_observations.push(Some(step.outcome.observation));
                self.observations[i] = env.reset(None)?;
            } else {
                out.final_observations.push(None);
                self.observations[i] = step.outcome.observation;
            }
            out.observations.push(self.observations[i].clone());
        }
        Ok(out)
    }
}
