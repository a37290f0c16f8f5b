//! Clipped-surrogate PPO update.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nn::Adam;
use crate::policy::{gaussian_log_prob, ActorCritic, ModelWorkspace};

const ADV_STD_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PpoError {
    #[error("invalid PPO config: {0}")]
    InvalidConfig(String),
    #[error(
        "non-finite gradient in epoch {epoch}, minibatch {minibatch} \
         (loss {loss}, policy {policy_loss}, value {value_loss}, grad norm {grad_norm})"
    )]
    NonFiniteGradient {
        epoch: usize,
        minibatch: usize,
        loss: f64,
        policy_loss: f64,
        value_loss: f64,
        grad_norm: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PpoConfig {
    pub gamma: f64,
    pub gae_lambda: f64,
    pub clip_epsilon: f64,
    pub epochs_per_update: usize,
    pub minibatches: usize,
    /// Steps per environment per update.
    pub rollout_length: usize,
    pub num_envs: usize,
    pub entropy_coef: f64,
    pub value_coef: f64,
    pub learning_rate: f64,
    pub max_grad_norm: f64,
    pub total_steps: u64,
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            gae_lambda: 0.95,
            clip_epsilon: 0.2,
            epochs_per_update: 4,
            minibatches: 4,
            rollout_length: 512,
            num_envs: 8,
            entropy_coef: 0.01,
            value_coef: 0.5,
            learning_rate: 3e-4,
            max_grad_norm: 0.5,
            total_steps: 200_000,
        }
    }
}

impl PpoConfig {
    pub fn batch_size(&self) -> usize {
        self.rollout_length * self.num_envs
    }

    pub fn validate(&self) -> Result<(), PpoError> {
        let bad = |msg: String| Err(PpoError::InvalidConfig(msg));
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad(format!("gamma must lie in (0, 1], got {}", self.gamma));
        }
        if !(0.0..=1.0).contains(&self.gae_lambda) {
            return bad(format!("gae_lambda must lie in [0, 1], got {}", self.gae_lambda));
        }
        if !(self.clip_epsilon > 0.0 && self.learning_rate > 0.0 && self.max_grad_norm > 0.0) {
            return bad("clip_epsilon, learning_rate and max_grad_norm must be positive".into());
        }
        if !(self.entropy_coef >= 0.0 && self.value_coef >= 0.0) {
            return bad("loss coefficients must be nonnegative".into());
        }
        if self.epochs_per_update == 0 || self.minibatches == 0 || self.rollout_length == 0 || self.num_envs == 0 {
            return bad("epochs, minibatches, rollout_length and num_envs must be positive".into());
        }
        if self.batch_size() % self.minibatches != 0 {
            return bad(format!(
                "rollout_length * num_envs = {} is not divisible by {} minibatches",
                self.batch_size(),
                self.minibatches
            ));
        }
        if self.total_steps < self.batch_size() as u64 {
            return bad(format!(
                "total_steps {} is less than one rollout ({})",
                self.total_steps,
                self.batch_size()
            ));
        }
        Ok(())
    }
}

/// Flattened rollout data, one row per environment step.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Batch {
    pub obs_dim: usize,
    pub act_dim: usize,
    pub observations: Vec<f64>,
    /// Sampled (unclipped) actions.
    pub actions: Vec<f64>,
    pub log_probs: Vec<f64>,
    pub values: Vec<f64>,
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
}

impl Batch {
    pub fn new(obs_dim: usize, act_dim: usize) -> Self {
        Self {
            obs_dim,
            act_dim,
            ..Self::default()
        }
    }

    pub fn len(&self) -> usize {
        self.log_probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_probs.is_empty()
    }

    pub fn obs(&self, i: usize) -> &[f64] {
        &self.observations[i * self.obs_dim..(i + 1) * self.obs_dim]
    }

    pub fn action(&self, i: usize) -> &[f64] {
        &self.actions[i * self.act_dim..(i + 1) * self.act_dim]
    }
}

/// Loss terms over one minibatch.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LossTerms {
    pub loss: f64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub approx_kl: f64,
    pub clip_fraction: f64,
}

/// Averages over every minibatch of one update.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct UpdateStats {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub approx_kl: f64,
    pub clip_fraction: f64,
    pub explained_variance: f64,
}

/// `1 − Var(returns − values) / Var(returns)`; 0 when the returns are constant.
pub fn explained_variance(values: &[f64], returns: &[f64]) -> f64 {
    let var = |xs: &mut dyn Iterator<Item = f64>| {
        let v: Vec<f64> = xs.collect();
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n
    };
    let var_returns = var(&mut returns.iter().copied());
    if var_returns < 1e-12 {
        return 0.0;
    }
    let var_resid = var(&mut returns.iter().zip(values).map(|(r, v)| r - v));
    1.0 - var_resid / var_returns
}

/// Loss of the PPO objective on `indices`, and its gradient if `grad` is given
/// (overwritten, same layout as the model parameters).
///
/// `loss = L_clip + c_v · ½ mean (V − R)² − c_e · H`, with advantages
/// normalized within the minibatch.
pub fn minibatch_loss(
    model: &ActorCritic,
    batch: &Batch,
    indices: &[usize],
    cfg: &PpoConfig,
    ws: &mut ModelWorkspace,
    mut grad: Option<&mut [f64]>,
) -> LossTerms {
    let n = indices.len() as f64;
    let adv_mean = indices.iter().map(|&i| batch.advantages[i]).sum::<f64>() / n;
    let adv_std = (indices.iter().map(|&i| (batch.advantages[i] - adv_mean).powi(2)).sum::<f64>() / n)
        .sqrt()
        .max(ADV_STD_FLOOR);

    if let Some(g) = grad.as_deref_mut() {
        g.iter_mut().for_each(|x| *x = 0.0);
    }
    let log_std = model.log_std().to_vec();
    let inv_var: Vec<f64> = log_std.iter().map(|ls| (-2.0 * ls).exp()).collect();
    let (actor_r, log_std_r, critic_r) = (model.actor_range(), model.log_std_range(), model.critic_range());
    let eps = cfg.clip_epsilon;
    let mut terms = LossTerms::default();
    let mut d_mean = vec![0.0; model.act_dim()];
    let mut d_log_std = vec![0.0; model.act_dim()];

    for &i in indices {
        let obs = batch.obs(i);
        let action = batch.action(i);
        let adv = (batch.advantages[i] - adv_mean) / adv_std;

        let mean = model.mean(obs, ws).to_vec();
        let logp = gaussian_log_prob(&mean, &log_std, action);
        let log_ratio = logp - batch.log_probs[i];
        let ratio = log_ratio.exp();
        let unclipped = -adv * ratio;
        let clipped = -adv * ratio.clamp(1.0 - eps, 1.0 + eps);
        terms.policy_loss += unclipped.max(clipped) / n;
        terms.approx_kl += -log_ratio / n;
        if (ratio - 1.0).abs() > eps {
            terms.clip_fraction += 1.0 / n;
        }

        let value = model.value(obs, ws);
        let err = value - batch.returns[i];
        terms.value_loss += 0.5 * err * err / n;

        if let Some(g) = grad.as_deref_mut() {
            // The clipped branch is flat in the ratio, so only the unclipped
            // branch carries gradient when it is the active maximum.
            let d_logp = if unclipped >= clipped { -adv * ratio / n } else { 0.0 };
            for d in 0..model.act_dim() {
                let diff = action[d] - mean[d];
                d_mean[d] = d_logp * diff * inv_var[d];
                d_log_std[d] += d_logp * (diff * diff * inv_var[d] - 1.0);
            }
            let actor_params = &model.params()[actor_r.clone()];
            model.actor_shape().backward(actor_params, &d_mean, &mut ws.actor, &mut g[actor_r.clone()]);
            let critic_params = &model.params()[critic_r.clone()];
            let d_value = [cfg.value_coef * err / n];
            model.critic_shape().backward(critic_params, &d_value, &mut ws.critic, &mut g[critic_r.clone()]);
        }
    }

    terms.entropy = model.entropy();
    terms.loss = terms.policy_loss + cfg.value_coef * terms.value_loss - cfg.entropy_coef * terms.entropy;
    if let Some(g) = grad {
        for (d, gi) in log_std_r.enumerate() {
            g[gi] = d_log_std[d] - cfg.entropy_coef;
        }
    }
    terms
}

fn global_norm(grad: &[f64]) -> f64 {
    grad.iter().map(|g| g * g).sum::<f64>().sqrt()
}

/// Runs `epochs_per_update` passes of shuffled minibatch updates over `batch`.
pub fn ppo_update<R: Rng + ?Sized>(
    model: &mut ActorCritic,
    opt: &mut Adam,
    batch: &Batch,
    cfg: &PpoConfig,
    rng: &mut R,
) -> Result<UpdateStats, PpoError> {
    let n = batch.len();
    if n == 0 || n % cfg.minibatches != 0 {
        return Err(PpoError::InvalidConfig(format!(
            "batch of {n} cannot be split into {} minibatches",
            cfg.minibatches
        )));
    }
    let mb_size = n / cfg.minibatches;
    let mut ws = model.workspace();
    let mut grad = vec![0.0; model.num_params()];
    let mut order: Vec<usize> = (0..n).collect();
    let mut acc = UpdateStats::default();
    let mut count = 0.0;
    opt.lr = cfg.learning_rate;

    for epoch in 0..cfg.epochs_per_update {
        order.shuffle(rng);
        for (minibatch, indices) in order.chunks(mb_size).enumerate() {
            let terms = minibatch_loss(model, batch, indices, cfg, &mut ws, Some(&mut grad));
            let norm = global_norm(&grad);
            if !norm.is_finite() || !terms.loss.is_finite() {
                return Err(PpoError::NonFiniteGradient {
                    epoch,
                    minibatch,
                    loss: terms.loss,
                    policy_loss: terms.policy_loss,
                    value_loss: terms.value_loss,
                    grad_norm: norm,
                });
            }
            if norm > cfg.max_grad_norm {
                let scale = cfg.max_grad_norm / norm;
                grad.iter_mut().for_each(|g| *g *= scale);
            }
            opt.step(model.params_mut(), &grad);
            acc.policy_loss += terms.policy_loss;
            acc.value_loss += terms.value_loss;
            acc.entropy += terms.entropy;
            acc.approx_kl += terms.approx_kl;
            acc.clip_fraction += terms.clip_fraction;
            count += 1.0;
        }
    }
    acc.policy_loss /= count;
    acc.value_loss /= count;
    acc.entropy /= count;
    acc.approx_kl /= count;
    acc.clip_fraction /= count;
    acc.explained_variance = explained_variance(&batch.values, &batch.returns);
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn on_policy_batch(model: &ActorCritic, n: usize, rng: &mut ChaCha8Rng) -> Batch {
        let mut ws = model.workspace();
        let mut b = Batch::new(model.obs_dim(), model.act_dim());
        for _ in 0..n {
            let obs: Vec<f64> = (0..model.obs_dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let (a, lp, v) = model.act(&obs, rng, &mut ws);
            b.observations.extend(&obs);
            b.actions.extend(&a);
            b.log_probs.push(lp);
            b.values.push(v);
            b.advantages.push(rng.random_range(-1.0..1.0));
            b.returns.push(v + rng.random_range(-0.5..0.5));
        }
        b
    }

    #[test]
    fn defaults_validate() {
        PpoConfig::default().validate().unwrap();
        let bad = PpoConfig {
            minibatches: 3,
            ..PpoConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = PpoConfig {
            gamma: 0.0,
            ..PpoConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn fresh_batch_has_unit_ratios() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let model = ActorCritic::new(6, 2, &[16, 16], &mut rng);
        let batch = on_policy_batch(&model, 64, &mut rng);
        let mut ws = model.workspace();
        let idx: Vec<usize> = (0..16).collect();
        let t = minibatch_loss(&model, &batch, &idx, &PpoConfig::default(), &mut ws, None);
        assert_eq!(t.clip_fraction, 0.0);
        assert_eq!(t.approx_kl, 0.0);
    }

    #[test]
    fn explained_variance_cases() {
        let r = [1.0, 2.0, 4.0, 3.0];
        assert_eq!(explained_variance(&r, &r), 1.0);
        assert!(explained_variance(&[2.5; 4], &r) <= 0.0);
        assert!(explained_variance(&[0.0; 4], &r) <= 0.0);
        assert_eq!(explained_variance(&[1.0, 2.0], &[3.0, 3.0]), 0.0);
    }

    #[test]
    fn update_reports_bounded_metrics_and_moves_params() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut model = ActorCritic::new(6, 2, &[16, 16], &mut rng);
        let before = model.params().to_vec();
        let batch = on_policy_batch(&model, 128, &mut rng);
        let cfg = PpoConfig::default();
        let mut opt = Adam::new(model.num_params(), cfg.learning_rate);
        let stats = ppo_update(&mut model, &mut opt, &batch, &cfg, &mut rng).unwrap();
        assert!((0.0..=1.0).contains(&stats.clip_fraction));
        assert!(stats.entropy.is_finite() && stats.value_loss >= 0.0);
        assert_ne!(model.params(), &before[..]);
    }

    #[test]
    fn non_finite_batches_abort() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut model = ActorCritic::new(6, 2, &[8], &mut rng);
        let mut batch = on_policy_batch(&model, 16, &mut rng);
        batch.returns.iter_mut().for_each(|r| *r = f64::NAN);
        let cfg = PpoConfig::default();
        let mut opt = Adam::new(model.num_params(), cfg.learning_rate);
        let err = ppo_update(&mut model, &mut opt, &batch, &cfg, &mut rng).unwrap_err();
        assert!(matches!(err, PpoError::NonFiniteGradient { epoch: 0, minibatch: 0, .. }));
    }
}
