//! Completion-sense benchmark.
//!
//! Each episode is a goal text plus keyframes at known completion
//! percentages. A potential function is scored on four metrics:
//!
//! - forward transition accuracy: consecutive frame pairs whose reward
//!   exceeds `epsilon`;
//! - monotonicity: fraction of consecutive potential pairs that strictly
//!   increase (and whether all of them do);
//! - Spearman rank correlation between completion and potential;
//! - jump detection: whether the single 0% → final transition is rewarded.

mod metrics;
mod report;
pub mod synthetic;

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::EmbeddingVector;
use crate::manifest::Episode;
use crate::potential::{PotentialConfig, PotentialError, PotentialMode};
use crate::provider::{EmbeddingProvider, ProviderError};
use crate::reward::{BaseMode, RewardConfig};

pub use metrics::{forward_transition_accuracy, jump_detection, monotonicity, spearman};
pub use report::{aggregate, render_report, render_reports, BenchmarkReport, ReportFormat};

/// Reward threshold for counting a transition as positive.
pub const DEFAULT_EPSILON: f64 = 0.001;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("need at least 2 frames, got {0}")]
    TooFewFrames(usize),
    #[error("length mismatch: {completions} completions vs {potentials} potentials")]
    LengthMismatch { completions: usize, potentials: usize },
    #[error("no episode results to aggregate")]
    EmptyResults,
    #[error("epsilon must be positive, got {0}")]
    InvalidEpsilon(f64),
    #[error("episode `{task}`: {source}")]
    Provider {
        task: String,
        #[source]
        source: ProviderError,
    },
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    Reward(#[from] crate::reward::RewardError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub epsilon: f64,
    pub potential: PotentialConfig,
    pub reward: RewardConfig,
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(BenchError::InvalidEpsilon(self.epsilon));
        }
        self.potential.validate()?;
        self.reward.validate()?;
        Ok(())
    }
}

impl Default for BenchConfig {
    /// Pure potential evaluation: β = 0 and difference-based reward, so the
    /// benchmark scores the potential function itself.
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            potential: PotentialConfig::default(),
            reward: RewardConfig {
                beta: 0.0,
                base_mode: BaseMode::PotentialDifference,
                invocation_interval: 1,
                ..RewardConfig::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub task_name: String,
    pub potentials: Vec<f64>,
    pub forward_hits: usize,
    pub forward_total: usize,
    pub monotone: bool,
    pub mono_fraction: f64,
    pub spearman_rho: f64,
    pub jump_positive: bool,
    pub latency_per_frame_ms: f64,
}

/// One potential per keyframe plus the time spent inside provider calls.
pub fn timed_episode_potentials(
    ep: &Episode,
    provider: &dyn EmbeddingProvider,
    cfg: &BenchConfig,
) -> Result<(Vec<f64>, Duration), BenchError> {
    let provider_err = |source| BenchError::Provider {
        task: ep.task_name.clone(),
        source,
    };
    let refs = ep.frame_refs();
    let started = Instant::now();
    let goal = provider
        .embed_text(std::slice::from_ref(&ep.goal_text))
        .map_err(provider_err)?;
    // Caption mode: frame references name caption embeddings (text kind).
    let frames: Vec<EmbeddingVector> = match cfg.potential.mode {
        PotentialMode::ClipDirect => provider.embed_image(&refs),
        PotentialMode::CaptionDirect => provider.embed_text(&refs),
    }
    .map_err(provider_err)?;
    let elapsed = started.elapsed();
    let goal = goal.into_iter().next().ok_or(BenchError::TooFewFrames(0))?;
    let baseline = &frames[ep.baseline_index()];
    let potentials = frames
        .iter()
        .map(|f| cfg.potential.evaluate(f, &goal, Some(baseline)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((potentials, elapsed))
}

pub fn episode_potentials(
    ep: &Episode,
    provider: &dyn EmbeddingProvider,
    cfg: &BenchConfig,
) -> Result<Vec<f64>, BenchError> {
    Ok(timed_episode_potentials(ep, provider, cfg)?.0)
}

/// Scores an episode from already computed potentials.
pub fn score_potentials(
    task_name: &str,
    completions: &[f64],
    potentials: Vec<f64>,
    latency_per_frame_ms: f64,
    cfg: &BenchConfig,
) -> Result<EpisodeResult, BenchError> {
    let (forward_hits, forward_total) = forward_transition_accuracy(&potentials, cfg)?;
    let (mono_fraction, monotone) = monotonicity(&potentials)?;
    let spearman_rho = spearman(completions, &potentials)?;
    let jump_positive = jump_detection(potentials[0], potentials[potentials.len() - 1], cfg);
    Ok(EpisodeResult {
        task_name: task_name.to_string(),
        potentials,
        forward_hits,
        forward_total,
        monotone,
        mono_fraction,
        spearman_rho,
        jump_positive,
        latency_per_frame_ms,
    })
}

pub fn evaluate_episode(
    ep: &Episode,
    provider: &dyn EmbeddingProvider,
    cfg: &BenchConfig,
) -> Result<EpisodeResult, BenchError> {
    let (potentials, elapsed) = timed_episode_potentials(ep, provider, cfg)?;
    let latency = if provider.reports_latency() {
        elapsed.as_secs_f64() * 1e3 / potentials.len() as f64
    } else {
        0.0
    };
    score_potentials(&ep.task_name, &ep.completions(), potentials, latency, cfg)
}

pub fn run_benchmark(
    episodes: &[Episode],
    provider: &dyn EmbeddingProvider,
    cfg: &BenchConfig,
) -> Result<BenchmarkReport, BenchError> {
    cfg.validate()?;
    let results = episodes
        .iter()
        .map(|ep| evaluate_episode(ep, provider, cfg))
        .collect::<Result<Vec<_>, _>>()?;
    aggregate(results)
}
