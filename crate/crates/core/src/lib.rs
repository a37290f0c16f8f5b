//! Completion-sense rewards built from embedding similarity.
//!
//! The crate is organised in three layers:
//!
//! - [`embedding`], [`potential`], [`reward`] and [`tracker`] hold the reward
//!   formulas: cosine potentials, the sigmoid completion activation, the
//!   progress multiplier and the combined completion reward, plus an
//!   interval-caching tracker for online use.
//! - [`manifest`], [`cache`], [`provider`] and [`http`] move embeddings in and
//!   out of the process: benchmark manifests, line-oriented embedding caches
//!   and the client side of the embedding service protocol.
//! - [`bench`] scores any potential function on completion-sense
//!   discrimination (forward transition accuracy, monotonicity, Spearman
//!   correlation and jump detection).

pub mod bench;
pub mod cache;
pub mod embedding;
pub mod http;
pub mod manifest;
pub mod potential;
pub mod provider;
pub mod reward;
pub mod tracker;

pub use embedding::{cosine_similarity, EmbeddingError, EmbeddingVector};
pub use potential::{caption_potential, clip_potential, PotentialConfig, PotentialMode};
pub use reward::{
    activation, completion_reward, progress_delta, ActivationConfig, BaseMode, RewardBreakdown,
    RewardConfig, RewardError,
};
pub use tracker::RewardTracker;
