//! Potential functions over embeddings.
//!
//! Two instantiations are supported. `CaptionDirect` scores a text embedding
//! of a scene caption against the goal text embedding. `ClipDirect` scores an
//! image embedding against the goal text embedding in a shared image/text
//! space and subtracts a penalty for still looking like the episode's first
//! observation:
//!
//! ```text
//! Φ(s) = α · sim(img(s), text(g)) − (1 − α) · sim(img(s), img(s0))
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::{cosine_similarity, EmbeddingError, EmbeddingVector};

/// Goal-affinity weight used by the image/text potential unless overridden.
pub const DEFAULT_ALPHA: f64 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialMode {
    CaptionDirect,
    ClipDirect,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PotentialError {
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error("alpha must lie in [0, 1], got {0}")]
    InvalidAlpha(f64),
    #[error("operation requires {expected:?} mode, config is {actual:?}")]
    ModeMismatch {
        expected: PotentialMode,
        actual: PotentialMode,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialConfig {
    pub alpha: f64,
    pub mode: PotentialMode,
}

impl PotentialConfig {
    pub fn clip_direct(alpha: f64) -> Result<Self, PotentialError> {
        let cfg = Self {
            alpha,
            mode: PotentialMode::ClipDirect,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn caption_direct() -> Self {
        Self {
            alpha: 1.0,
            mode: PotentialMode::CaptionDirect,
        }
    }

    pub fn validate(&self) -> Result<(), PotentialError> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(PotentialError::InvalidAlpha(self.alpha));
        }
        Ok(())
    }

    /// Evaluates the configured potential. `baseline` is only consulted in
    /// `ClipDirect` mode; when absent the state is its own baseline.
    pub fn evaluate(
        &self,
        state: &EmbeddingVector,
        goal: &EmbeddingVector,
        baseline: Option<&EmbeddingVector>,
    ) -> Result<f64, PotentialError> {
        match self.mode {
            PotentialMode::CaptionDirect => Ok(caption_potential(state, goal)?),
            PotentialMode::ClipDirect => clip_potential(state, goal, baseline.unwrap_or(state), self),
        }
    }
}

impl Default for PotentialConfig {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            mode: PotentialMode::ClipDirect,
        }
    }
}

/// Cosine similarity between a caption embedding and the goal embedding.
pub fn caption_potential(
    state_text: &EmbeddingVector,
    goal_text: &EmbeddingVector,
) -> Result<f64, EmbeddingError> {
    cosine_similarity(state_text, goal_text)
}

/// Goal similarity weighted by `alpha`, minus `1 - alpha` times similarity to
/// the baseline observation. Always in `[-1, 1]`.
pub fn clip_potential(
    state: &EmbeddingVector,
    goal: &EmbeddingVector,
    baseline: &EmbeddingVector,
    cfg: &PotentialConfig,
) -> Result<f64, PotentialError> {
    if cfg.mode != PotentialMode::ClipDirect {
        return Err(PotentialError::ModeMismatch {
            expected: PotentialMode::ClipDirect,
            actual: cfg.mode,
        });
    }
    cfg.validate()?;
    let to_goal = cosine_similarity(state, goal)?;
    // Self-similarity is exactly one, not one-minus-rounding.
    let to_baseline = if state == baseline {
        1.0
    } else {
        cosine_similarity(state, baseline)?
    };
    let phi = cfg.alpha * to_goal - (1.0 - cfg.alpha) * to_baseline;
    Ok(phi.clamp(-1.0, 1.0))
}
