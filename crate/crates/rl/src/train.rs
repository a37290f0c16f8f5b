//! Training loop and logs.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::env::{ReachEnv, ReachEnvConfig};
use crate::evaluate::{evaluate, greedy, EvalResult};
use crate::gae::compute_gae;
use crate::nn::Adam;
use crate::policy::{clip_action, ActorCritic};
use crate::ppo::{ppo_update, Batch, PpoConfig};
use crate::shaping::{ShapedEnv, ShapingConfig};
use crate::vec_env::VecEnv;
use crate::RlError;

/// Evaluation episodes use these seeds in every run, so checkpoints of
/// different runs are scored on the same start positions.
const EVAL_SEED_BASE: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum RewardSetting {
    /// Environment reward only.
    Sparse,
    /// Environment reward plus the completion-sense tracker.
    Zero(ShapingConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub env: ReachEnvConfig,
    pub ppo: PpoConfig,
    pub reward: RewardSetting,
    pub hidden: Vec<usize>,
    /// Seeds network initialization, action sampling and episode starts.
    pub seed: u64,
    pub eval_episodes: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            env: ReachEnvConfig::default(),
            ppo: PpoConfig::default(),
            reward: RewardSetting::Zero(ShapingConfig::default()),
            hidden: vec![64, 64],
            seed: 0,
            eval_episodes: 32,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), RlError> {
        self.env.validate()?;
        self.ppo.validate()?;
        if let RewardSetting::Zero(s) = &self.reward {
            s.reward.validate()?;
            s.potential.validate()?;
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return Err(RlError::InvalidConfig(format!("invalid hidden sizes {:?}", self.hidden)));
        }
        if self.eval_episodes == 0 {
            return Err(RlError::InvalidConfig("eval_episodes must be positive".into()));
        }
        Ok(())
    }

    pub fn updates(&self) -> u64 {
        self.ppo.total_steps / self.ppo.batch_size() as u64
    }

    pub fn eval_seeds(&self) -> Vec<u64> {
        (0..self.eval_episodes as u64).map(|i| EVAL_SEED_BASE + i).collect()
    }
}

/// One row of the training log, written once per update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainMetrics {
    /// Environment steps taken so far.
    pub step: u64,
    /// Mean environment return of training episodes that ended during the
    /// rollout (carried over when none did).
    pub episodic_return: f64,
    pub success_once: f64,
    pub success_at_end: f64,
    pub value_loss: f64,
    pub policy_loss: f64,
    pub approx_kl: f64,
    pub clip_fraction: f64,
    pub entropy: f64,
    pub explained_variance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingLog {
    pub metrics: Vec<TrainMetrics>,
    /// Greedy evaluation after each update; `success_*` mirror `metrics`.
    pub evaluations: Vec<EvalResult>,
    /// Potentials computed by the shaping trackers across all environments.
    pub potential_evaluations: u64,
}

impl TrainingLog {
    pub fn final_eval(&self) -> Option<&EvalResult> {
        self.evaluations.last()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), RlError> {
        let mut w = csv::Writer::from_writer(out);
        for m in &self.metrics {
            w.serialize(m)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String, RlError> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn save(&self, path: &Path) -> Result<(), RlError> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

pub fn read_metrics(path: &Path) -> Result<Vec<TrainMetrics>, RlError> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

fn make_envs(cfg: &TrainConfig, probe: &ReachEnv) -> Result<VecEnv, RlError> {
    let envs = (0..cfg.ppo.num_envs)
        .map(|_| {
            let env = ReachEnv::with_map(cfg.env.clone(), probe.feature_map().clone());
            match cfg.reward {
                RewardSetting::Sparse => Ok(ShapedEnv::sparse(env)),
                RewardSetting::Zero(s) => ShapedEnv::shaped(env, s),
            }
        })
        .collect::<Result<Vec<_>, RlError>>()?;
    VecEnv::new(envs)
}

/// Trains a fresh policy and returns its log. Deterministic given the config.
pub fn train(cfg: &TrainConfig) -> Result<TrainingLog, RlError> {
    cfg.validate()?;
    let probe = ReachEnv::new(cfg.env.clone())?;
    let mut venv = make_envs(cfg, &probe)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut model = ActorCritic::new(probe.obs_dim(), 2, &cfg.hidden, &mut rng);
    let mut opt = Adam::new(model.num_params(), cfg.ppo.learning_rate);
    let mut ws = model.workspace();
    let eval_seeds = cfg.eval_seeds();

    let (n_envs, horizon) = (cfg.ppo.num_envs, cfg.ppo.rollout_length);
    let obs_dim = probe.obs_dim();
    let mut obs: Vec<Vec<f64>> = venv.reset(rng.random())?.to_vec();

    let mut log = TrainingLog {
        metrics: Vec::new(),
        evaluations: Vec::new(),
        potential_evaluations: 0,
    };
    let mut last_return = 0.0;
    let mut steps = 0u64;

    for _ in 0..cfg.updates() {
        // Columns indexed [env][t].
        let mut col_obs = vec![Vec::with_capacity(horizon * obs_dim); n_envs];
        let mut col_act = vec![Vec::with_capacity(horizon * 2); n_envs];
        let mut col_logp = vec![Vec::with_capacity(horizon); n_envs];
        let mut col_val = vec![Vec::with_capacity(horizon); n_envs];
        let mut col_rew = vec![Vec::with_capacity(horizon); n_envs];
        let mut col_done = vec![Vec::with_capacity(horizon); n_envs];
        let (mut finished_return, mut finished) = (0.0, 0usize);

        for _ in 0..horizon {
            let mut actions = Vec::with_capacity(n_envs);
            for e in 0..n_envs {
                let (a, lp, v) = model.act(&obs[e], &mut rng, &mut ws);
                actions.push(clip_action(&a));
                col_obs[e].extend_from_slice(&obs[e]);
                col_act[e].extend(a);
                col_logp[e].push(lp);
                col_val[e].push(v);
            }
            let step = venv.step(&actions)?;
            for e in 0..n_envs {
                let mut r = step.rewards[e];
                if step.truncated[e] {
                    let last = step.final_observations[e].as_ref().expect("ended episodes carry their final observation");
                    r += cfg.ppo.gamma * model.value(last, &mut ws);
                }
                col_rew[e].push(r);
                col_done[e].push(step.dones[e]);
            }
            for (_, ep) in &step.finished {
                finished_return += ep.env_return;
                finished += 1;
            }
            obs = step.observations;
        }
        steps += (horizon * n_envs) as u64;

        let mut batch = Batch::new(obs_dim, 2);
        for e in 0..n_envs {
            let bootstrap = model.value(&obs[e], &mut ws);
            let (adv, ret) = compute_gae(
                &col_rew[e],
                &col_val[e],
                &col_done[e],
                bootstrap,
                cfg.ppo.gamma,
                cfg.ppo.gae_lambda,
            );
            batch.observations.extend_from_slice(&col_obs[e]);
            batch.actions.extend_from_slice(&col_act[e]);
            batch.log_probs.extend_from_slice(&col_logp[e]);
            batch.values.extend_from_slice(&col_val[e]);
            batch.advantages.extend(adv);
            batch.returns.extend(ret);
        }

        let stats = ppo_update(&mut model, &mut opt, &batch, &cfg.ppo, &mut rng)?;
        let eval = evaluate(&probe, &eval_seeds, greedy(&model))?;
        if finished > 0 {
            last_return = finished_return / finished as f64;
        }
        log.metrics.push(TrainMetrics {
            step: steps,
            episodic_return: last_return,
            success_once: eval.success_once,
            success_at_end: eval.success_at_end,
            value_loss: stats.value_loss,
            policy_loss: stats.policy_loss,
            approx_kl: stats.approx_kl,
            clip_fraction: stats.clip_fraction,
            entropy: stats.entropy,
            explained_variance: stats.explained_variance,
        });
        log.evaluations.push(eval);
    }
    log.potential_evaluations = venv.envs().iter().map(ShapedEnv::potential_evaluations).sum();
    Ok(log)
}
