//! Planar reach task observed through a smooth embedding.
//!
//! The agent moves in the unit square toward a fixed goal. Observations are
//! not positions but embeddings of the position under a fixed random Fourier
//! feature map: for frequencies `ω_1..ω_m`,
//!
//! ```text
//! g(x) = [cos(ω_i·x), sin(ω_i·x)]_i / √m
//! ```
//!
//! so `g(x)·g(y) = (1/m) Σ cos(ω_i·(x − y))`. Every `|ω_i| ≤ π/√2`, which keeps
//! each term decreasing along any ray out of the goal for the whole arena
//! (diameter √2), so similarity to the goal embedding grows as the agent
//! approaches it. The environment reward is sparse: 1 on reaching the goal.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use reward_zero::bench::spearman;
use reward_zero::EmbeddingVector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Upper bound on feature frequency magnitudes.
pub const MAX_FREQUENCY: f64 = PI * FRAC_1_SQRT_2;
const MIN_FREQUENCY: f64 = 1.0;
const CHECK_GRID: usize = 32;
/// Required rank correlation between goal distance and goal similarity.
const MAX_DISTANCE_RHO: f64 = -0.95;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("step called after the episode finished; reset first")]
    StepAfterDone,
    #[error("step called before reset")]
    NotReset,
    #[error("action component {index} = {value} outside [-1, 1]")]
    InvalidAction { index: usize, value: f64 },
    #[error("invalid environment config: {0}")]
    InvalidConfig(String),
    #[error("feature map failed its monotonicity check: {0}")]
    NonMonotoneEmbedding(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReachEnvConfig {
    /// Even; half of it is the number of Fourier frequencies.
    pub embedding_dim: usize,
    pub max_steps: u32,
    pub goal_radius: f64,
    /// Displacement per unit action.
    pub action_scale: f64,
    pub obs_noise_std: f64,
    pub goal: [f64; 2],
    /// Episode starts are drawn uniformly from the arena at least this far
    /// from the goal.
    pub min_start_distance: f64,
    /// End the episode on reaching the goal. When false the episode always
    /// runs `max_steps` and every step inside the goal region pays 1.
    pub terminate_on_success: bool,
    /// Seeds the feature map and the episode start distribution.
    pub seed: u64,
}

impl Default for ReachEnvConfig {
    fn default() -> Self {
        Self {
            embedding_dim: 32,
            max_steps: 200,
            goal_radius: 0.05,
            action_scale: 0.05,
            obs_noise_std: 0.01,
            goal: [0.75, 0.75],
            min_start_distance: 0.0,
            terminate_on_success: true,
            seed: 0,
        }
    }
}

impl ReachEnvConfig {
    /// Harder exploration variant: shorter steps, shorter episodes and starts
    /// at least 0.6 from the goal. Sparse-reward PPO rarely finds the goal
    /// here within a few hundred thousand steps.
    pub fn far_start() -> Self {
        Self {
            max_steps: 150,
            action_scale: 0.02,
            min_start_distance: 0.6,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        let bad = |msg: String| Err(EnvError::InvalidConfig(msg));
        if self.embedding_dim < 8 || self.embedding_dim % 2 != 0 {
            return bad(format!("embedding_dim must be even and >= 8, got {}", self.embedding_dim));
        }
        if self.max_steps == 0 {
            return bad("max_steps must be positive".into());
        }
        if !(self.goal_radius > 0.0 && self.action_scale > 0.0) {
            return bad("goal_radius and action_scale must be positive".into());
        }
        if !(self.obs_noise_std >= 0.0) {
            return bad("obs_noise_std must be nonnegative".into());
        }
        if !self.goal.iter().all(|g| (0.0..=1.0).contains(g)) {
            return bad(format!("goal {:?} outside the unit square", self.goal));
        }
        let farthest = self
            .goal
            .iter()
            .map(|g| g.max(1.0 - g).powi(2))
            .sum::<f64>()
            .sqrt();
        if !(self.min_start_distance >= 0.0 && self.min_start_distance < 0.9 * farthest) {
            return bad(format!(
                "min_start_distance {} leaves too little of the arena to start in",
                self.min_start_distance
            ));
        }
        Ok(())
    }
}

/// Fixed map from positions to unit-norm embeddings.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    frequencies: Vec<[f64; 2]>,
}

impl FeatureMap {
    pub fn new(embedding_dim: usize, seed: u64) -> Self {
        let m = embedding_dim / 2;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_f00d);
        // Stratified directions over the half circle (the sin/cos pair covers ±ω).
        let frequencies = (0..m)
            .map(|i| {
                let angle = (i as f64 + rng.random::<f64>()) / m as f64 * PI;
                let radius = rng.random_range(MIN_FREQUENCY..MAX_FREQUENCY);
                [radius * angle.cos(), radius * angle.sin()]
            })
            .collect();
        Self { frequencies }
    }

    pub fn dim(&self) -> usize {
        2 * self.frequencies.len()
    }

    pub fn embed(&self, pos: [f64; 2]) -> Vec<f64> {
        let scale = 1.0 / (self.frequencies.len() as f64).sqrt();
        let mut out = Vec::with_capacity(self.dim());
        for w in &self.frequencies {
            let (s, c) = (w[0] * pos[0] + w[1] * pos[1]).sin_cos();
            out.push(c * scale);
            out.push(s * scale);
        }
        out
    }

    pub fn similarity(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        let d = [a[0] - b[0], a[1] - b[1]];
        let m = self.frequencies.len() as f64;
        self.frequencies
            .iter()
            .map(|w| (w[0] * d[0] + w[1] * d[1]).cos())
            .sum::<f64>()
            / m
    }

    /// Checks over a grid of cell centres that moving halfway to `goal`
    /// always raises similarity, and that similarity ranks almost inversely
    /// with distance overall.
    pub fn verify_monotone(&self, goal: [f64; 2]) -> Result<(), EnvError> {
        let mut dists = Vec::with_capacity(CHECK_GRID * CHECK_GRID);
        let mut sims = Vec::with_capacity(CHECK_GRID * CHECK_GRID);
        for i in 0..CHECK_GRID {
            for j in 0..CHECK_GRID {
                let x = [(i as f64 + 0.5) / CHECK_GRID as f64, (j as f64 + 0.5) / CHECK_GRID as f64];
                let dist = distance(x, goal);
                let sim = self.similarity(x, goal);
                if dist > 1e-9 {
                    let mid = [(x[0] + goal[0]) / 2.0, (x[1] + goal[1]) / 2.0];
                    if self.similarity(mid, goal) <= sim {
                        return Err(EnvError::NonMonotoneEmbedding(format!(
                            "similarity does not rise moving from {x:?} toward the goal"
                        )));
                    }
                }
                dists.push(dist);
                sims.push(sim);
            }
        }
        let rho = spearman(&dists, &sims).expect("grid has equal-length samples");
        if rho > MAX_DISTANCE_RHO {
            return Err(EnvError::NonMonotoneEmbedding(format!(
                "distance/similarity rank correlation {rho:.4} above {MAX_DISTANCE_RHO}"
            )));
        }
        Ok(())
    }
}

fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub observation: Vec<f64>,
    pub env_reward: f64,
    pub done: bool,
    pub success: bool,
    /// Ended by the step limit rather than by a terminating success.
    pub truncated: bool,
}

#[derive(Debug, Clone)]
pub struct ReachEnv {
    cfg: ReachEnvConfig,
    map: Arc<FeatureMap>,
    goal_embedding: EmbeddingVector,
    rng: ChaCha8Rng,
    noise: Option<Normal<f64>>,
    position: [f64; 2],
    steps: u32,
    done: bool,
    started: bool,
}

impl ReachEnv {
    pub fn new(cfg: ReachEnvConfig) -> Result<Self, EnvError> {
        cfg.validate()?;
        let map = FeatureMap::new(cfg.embedding_dim, cfg.seed);
        map.verify_monotone(cfg.goal)?;
        Ok(Self::with_map(cfg, Arc::new(map)))
    }

    /// Shares an already verified feature map.
    pub fn with_map(cfg: ReachEnvConfig, map: Arc<FeatureMap>) -> Self {
        let goal_embedding = EmbeddingVector::unit(map.embed(cfg.goal)).expect("feature embeddings are unit norm");
        let noise = (cfg.obs_noise_std > 0.0).then(|| Normal::new(0.0, cfg.obs_noise_std).expect("finite std"));
        Self {
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            cfg,
            map,
            goal_embedding,
            noise,
            position: [0.0, 0.0],
            steps: 0,
            done: false,
            started: false,
        }
    }

    pub fn config(&self) -> &ReachEnvConfig {
        &self.cfg
    }

    pub fn feature_map(&self) -> &Arc<FeatureMap> {
        &self.map
    }

    /// Noise-free embedding of the goal position (the "goal description").
    pub fn goal_embedding(&self) -> &EmbeddingVector {
        &self.goal_embedding
    }

    pub fn position(&self) -> [f64; 2] {
        self.position
    }

    pub fn steps(&self) -> u32 {
        self.steps
    }

    pub fn obs_dim(&self) -> usize {
        self.map.dim()
    }

    /// Starts an episode at a uniformly random position. `Some(seed)` reseeds
    /// the episode stream first.
    pub fn reset(&mut self, seed: Option<u64>) -> Vec<f64> {
        if let Some(s) = seed {
            self.rng = ChaCha8Rng::seed_from_u64(s);
        }
        let start = loop {
            let p = [self.rng.random::<f64>(), self.rng.random::<f64>()];
            if distance(p, self.cfg.goal) >= self.cfg.min_start_distance {
                break p;
            }
        };
        self.reset_at(start)
    }

    pub fn reset_at(&mut self, position: [f64; 2]) -> Vec<f64> {
        self.position = [position[0].clamp(0.0, 1.0), position[1].clamp(0.0, 1.0)];
        self.steps = 0;
        self.done = false;
        self.started = true;
        self.observe()
    }

    fn observe(&mut self) -> Vec<f64> {
        let mut obs = self.map.embed(self.position);
        if let Some(noise) = &self.noise {
            for v in obs.iter_mut() {
                *v += noise.sample(&mut self.rng);
            }
            let norm = obs.iter().map(|v| v * v).sum::<f64>().sqrt();
            obs.iter_mut().for_each(|v| *v /= norm);
        }
        obs
    }

    pub fn goal_distance(&self) -> f64 {
        distance(self.position, self.cfg.goal)
    }

    pub fn step(&mut self, action: [f64; 2]) -> Result<StepOutcome, EnvError> {
        if !self.started {
            return Err(EnvError::NotReset);
        }
        if self.done {
            return Err(EnvError::StepAfterDone);
        }
        for (index, &value) in action.iter().enumerate() {
            if !(-1.0..=1.0).contains(&value) {
                return Err(EnvError::InvalidAction { index, value });
            }
        }
        for (p, a) in self.position.iter_mut().zip(action) {
            *p = (*p + self.cfg.action_scale * a).clamp(0.0, 1.0);
        }
        self.steps += 1;
        let success = self.goal_distance() <= self.cfg.goal_radius;
        let at_limit = self.steps >= self.cfg.max_steps;
        let ends_on_success = success && self.cfg.terminate_on_success;
        let truncated = at_limit && !ends_on_success;
        self.done = ends_on_success || at_limit;
        Ok(StepOutcome {
            observation: self.observe(),
            env_reward: if success { 1.0 } else { 0.0 },
            done: self.done,
            success,
            truncated,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env() -> ReachEnv {
        ReachEnv::new(ReachEnvConfig::default()).unwrap()
    }

    #[test]
    fn embeddings_are_unit_and_similarity_matches_dot() {
        let map = FeatureMap::new(32, 1);
        let (a, b) = ([0.1, 0.9], [0.6, 0.2]);
        let (ea, eb) = (map.embed(a), map.embed(b));
        let norm: f64 = ea.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
        let dot: f64 = ea.iter().zip(&eb).map(|(x, y)| x * y).sum();
        assert!((dot - map.similarity(a, b)).abs() < 1e-12);
    }

    #[test]
    fn default_maps_pass_the_grid_check() {
        for seed in 0..20 {
            let map = FeatureMap::new(32, seed);
            map.verify_monotone([0.75, 0.75]).unwrap();
            map.verify_monotone([0.2, 0.5]).unwrap();
        }
    }

    #[test]
    fn starts_respect_minimum_distance() {
        let mut e = ReachEnv::new(ReachEnvConfig {
            min_start_distance: 0.5,
            ..ReachEnvConfig::default()
        })
        .unwrap();
        for seed in 0..200 {
            e.reset(Some(seed));
            assert!(e.goal_distance() >= 0.5);
        }
        let impossible = ReachEnvConfig {
            min_start_distance: 1.2,
            ..ReachEnvConfig::default()
        };
        assert!(impossible.validate().is_err());
    }

    #[test]
    fn zero_action_keeps_position() {
        let mut e = env();
        e.reset(Some(3));
        let before = e.position();
        e.step([0.0, 0.0]).unwrap();
        assert_eq!(e.position(), before);
    }

    #[test]
    fn starting_on_goal_succeeds_immediately() {
        let mut e = env();
        e.reset_at([0.75, 0.75]);
        let out = e.step([0.0, 0.0]).unwrap();
        assert!(out.success && out.done && !out.truncated);
        assert_eq!(out.env_reward, 1.0);
        assert!(matches!(e.step([0.0, 0.0]), Err(EnvError::StepAfterDone)));
    }

    #[test]
    fn positions_clip_to_arena_and_episodes_truncate() {
        let mut e = ReachEnv::new(ReachEnvConfig {
            max_steps: 30,
            ..ReachEnvConfig::default()
        })
        .unwrap();
        e.reset_at([0.0, 0.0]);
        let mut last = None;
        for _ in 0..30 {
            last = Some(e.step([-1.0, -1.0]).unwrap());
        }
        assert_eq!(e.position(), [0.0, 0.0]);
        let last = last.unwrap();
        assert!(last.done && last.truncated && !last.success);
    }

    #[test]
    fn hold_mode_pays_every_step_at_goal() {
        let mut e = ReachEnv::new(ReachEnvConfig {
            max_steps: 5,
            terminate_on_success: false,
            ..ReachEnvConfig::default()
        })
        .unwrap();
        e.reset_at([0.75, 0.75]);
        let outs: Vec<_> = (0..5).map(|_| e.step([0.0, 0.0]).unwrap()).collect();
        assert!(outs.iter().all(|o| o.success && o.env_reward == 1.0));
        assert!(outs[..4].iter().all(|o| !o.done));
        assert!(outs[4].done && outs[4].truncated);
    }

    #[test]
    fn rejects_bad_actions_and_configs() {
        let mut e = env();
        assert!(matches!(e.step([0.0, 0.0]), Err(EnvError::NotReset)));
        e.reset(None);
        assert!(matches!(e.step([1.5, 0.0]), Err(EnvError::InvalidAction { index: 0, .. })));
        assert!(matches!(e.step([0.0, f64::NAN]), Err(EnvError::InvalidAction { index: 1, .. })));
        let bad = ReachEnvConfig {
            embedding_dim: 7,
            ..ReachEnvConfig::default()
        };
        assert!(ReachEnv::new(bad).is_err());
    }

    #[test]
    fn seeded_rollouts_replay_bitwise() {
        let run = || {
            let mut e = env();
            let mut trace = vec![e.reset(Some(11))];
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            for _ in 0..50 {
                let a = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
                match e.step(a) {
                    Ok(o) => trace.push(o.observation),
                    Err(_) => break,
                }
            }
            trace
        };
        let (a, b) = (run(), run());
        let bits = |t: &Vec<Vec<f64>>| t.iter().flatten().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }
}
