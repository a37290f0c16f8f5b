//! Deterministic policy evaluation.

use serde::{Deserialize, Serialize};

use crate::env::{ReachEnv, ReachEnvConfig};
use crate::policy::{clip_action, ActorCritic};
use crate::RlError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    /// Fraction of episodes that touched the goal region at some step.
    pub success_once: f64,
    /// Fraction of episodes inside the goal region at their final step.
    pub success_at_end: f64,
    /// Mean environment return, i.e. mean number of steps spent at the goal.
    pub mean_return: f64,
}

/// Runs one episode per seed. Episodes always last `max_steps` (success does
/// not end them), so holding the goal is measured as well as reaching it.
pub fn evaluate<P>(env: &ReachEnv, seeds: &[u64], mut policy: P) -> Result<EvalResult, RlError>
where
    P: FnMut(&[f64]) -> [f64; 2],
{
    if seeds.is_empty() {
        return Err(RlError::InvalidConfig("evaluation needs at least one episode".into()));
    }
    let cfg = ReachEnvConfig {
        terminate_on_success: false,
        ..env.config().clone()
    };
    let mut env = ReachEnv::with_map(cfg, env.feature_map().clone());
    let (mut once, mut at_end, mut total) = (0usize, 0usize, 0.0);
    for &seed in seeds {
        let mut obs = env.reset(Some(seed));
        let mut touched = false;
        loop {
            let out = env.step(policy(&obs))?;
            touched |= out.success;
            total += out.env_reward;
            if out.done {
                once += usize::from(touched);
                at_end += usize::from(out.success);
                break;
            }
            obs = out.observation;
        }
    }
    let n = seeds.len() as f64;
    Ok(EvalResult {
        success_once: once as f64 / n,
        success_at_end: at_end as f64 / n,
        mean_return: total / n,
    })
}

/// The policy's mean action, clipped to the action box.
pub fn greedy(model: &ActorCritic) -> impl FnMut(&[f64]) -> [f64; 2] + '_ {
    let mut ws = model.workspace();
    move |obs| clip_action(model.mean(obs, &mut ws))
}
