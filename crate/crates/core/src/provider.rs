//! Sources of embedding vectors.

use thiserror::Error;

use crate::cache::{EmbeddingCache, EmbeddingKind};
use crate::embedding::{EmbeddingError, EmbeddingVector};

#[derive(Debug, Error)]
pub enum ProviderError {
    #[error("embedding provider unavailable: {0}")]
    Unavailable(String),
    #[error("no cached {kind} embedding for id `{id}` (model `{model_tag}`)")]
    UnknownId {
        kind: EmbeddingKind,
        id: String,
        model_tag: String,
    },
    #[error("batch mixes embedding dimensions {first} and {other}")]
    DimensionInconsistency { first: usize, other: usize },
    #[error("empty embedding request")]
    EmptyBatch,
    #[error("provider returned {got} embeddings for {expected} inputs")]
    CountMismatch { expected: usize, got: usize },
    #[error("cannot read frame `{frame_ref}`: {source}")]
    FrameIo {
        frame_ref: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid embedding from provider: {0}")]
    InvalidVector(#[from] EmbeddingError),
}

/// Anything that can turn texts and frames into unit-norm embeddings.
///
/// Outputs are order-preserving (one vector per input) and deterministic for
/// identical inputs.
pub trait EmbeddingProvider: Send + Sync {
    fn model_tag(&self) -> &str;

    fn embed_text(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, ProviderError>;

    fn embed_image(&self, frame_refs: &[String]) -> Result<Vec<EmbeddingVector>, ProviderError>;

    /// Whether wall-clock time around calls reflects real inference cost.
    /// Cache lookups perform no inference and report zero latency.
    fn reports_latency(&self) -> bool {
        true
    }
}

/// Normalizes a batch and checks that every vector has the same dimension.
pub fn ingest_batch(batch: Vec<EmbeddingVector>) -> Result<Vec<EmbeddingVector>, ProviderError> {
    let mut out = Vec::with_capacity(batch.len());
    for v in batch {
        if let Some(first) = out.first().map(EmbeddingVector::dim) {
            if v.dim() != first {
                return Err(ProviderError::DimensionInconsistency {
                    first,
                    other: v.dim(),
                });
            }
        }
        out.push(v.normalized()?);
    }
    Ok(out)
}

/// Serves embeddings from a preloaded cache. Frame references and texts are
/// cache ids; every miss is an error.
#[derive(Debug, Clone)]
pub struct CacheProvider {
    cache: EmbeddingCache,
    model_tag: String,
}

impl CacheProvider {
    pub fn new(cache: EmbeddingCache, model_tag: impl Into<String>) -> Self {
        Self {
            cache,
            model_tag: model_tag.into(),
        }
    }

    /// Uses the cache's only model tag. `None` when the cache is empty or
    /// holds several models.
    pub fn single_model(cache: EmbeddingCache) -> Option<Self> {
        match cache.model_tags().as_slice() {
            [tag] => {
                let tag = tag.clone();
                Some(Self::new(cache, tag))
            }
            _ => None,
        }
    }

    pub fn cache(&self) -> &EmbeddingCache {
        &self.cache
    }

    fn lookup(&self, kind: EmbeddingKind, ids: &[String]) -> Result<Vec<EmbeddingVector>, ProviderError> {
        if ids.is_empty() {
            return Err(ProviderError::EmptyBatch);
        }
        let found = ids
            .iter()
            .map(|id| {
                self.cache
                    .get(kind, &self.model_tag, id)
                    .cloned()
                    .ok_or_else(|| ProviderError::UnknownId {
                        kind,
                        id: id.clone(),
                        model_tag: self.model_tag.clone(),
                    })
            })
            .collect::<Result<Vec<_>, _>>()?;
        ingest_batch(found)
    }
}

impl EmbeddingProvider for CacheProvider {
    fn model_tag(&self) -> &str {
        &self.model_tag
    }

    fn embed_text(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, ProviderError> {
        self.lookup(EmbeddingKind::Text, texts)
    }

    fn embed_image(&self, frame_refs: &[String]) -> Result<Vec<EmbeddingVector>, ProviderError> {
        self.lookup(EmbeddingKind::Image, frame_refs)
    }

    fn reports_latency(&self) -> bool {
        false
    }
}
