//! HTTP client for the embedding service.
//!
//! Wire protocol (all bodies JSON):
//!
//! | request                 | body                                         | response                           |
//! |-------------------------|----------------------------------------------|------------------------------------|
//! | `POST /v1/embed/text`   | `{"texts": [...], "model": "<tag>"}`         | `{"dim": D, "embeddings": [[..]]}` |
//! | `POST /v1/embed/image`  | `{"images_b64": [...], "model": "<tag>"}`    | same shape                         |
//! | `GET /healthz`          |                                              | `{"status": "ok", "model": "<tag>", "dim": D}` |
//!
//! Large inputs are split into batches of at most `max_batch` items; up to
//! `max_in_flight` batches are sent concurrently and results are reassembled
//! in request order.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use base64::Engine;
use serde::{Deserialize, Serialize};

use crate::embedding::EmbeddingVector;
use crate::provider::{ingest_batch, EmbeddingProvider, ProviderError};

pub const DEFAULT_MAX_IN_FLIGHT: usize = 4;
pub const DEFAULT_MAX_BATCH: usize = 16;
pub const TEXT_PATH: &str = "/v1/embed/text";
pub const IMAGE_PATH: &str = "/v1/embed/image";
pub const HEALTH_PATH: &str = "/healthz";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextRequest {
    pub texts: Vec<String>,
    pub model: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageRequest {
    pub images_b64: Vec<String>,
    pub model: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedResponse {
    pub dim: usize,
    pub embeddings: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HealthStatus {
    pub status: String,
    pub model: String,
    pub dim: usize,
}

impl HealthStatus {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

#[derive(Debug, Clone)]
pub struct HttpProviderConfig {
    pub endpoint: String,
    pub model_tag: String,
    pub max_in_flight: usize,
    pub max_batch: usize,
    pub timeout: Duration,
    /// Relative frame references are resolved against this directory.
    pub image_root: Option<PathBuf>,
}

impl HttpProviderConfig {
    pub fn new(endpoint: impl Into<String>, model_tag: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            model_tag: model_tag.into(),
            max_in_flight: DEFAULT_MAX_IN_FLIGHT,
            max_batch: DEFAULT_MAX_BATCH,
            timeout: Duration::from_secs(60),
            image_root: None,
        }
    }
}

pub struct HttpProvider {
    cfg: HttpProviderConfig,
    agent: ureq::Agent,
}

fn unavailable(e: impl std::fmt::Display) -> ProviderError {
    ProviderError::Unavailable(e.to_string())
}

impl HttpProvider {
    pub fn new(mut cfg: HttpProviderConfig) -> Self {
        cfg.endpoint = cfg.endpoint.trim_end_matches('/').to_string();
        cfg.max_in_flight = cfg.max_in_flight.max(1);
        cfg.max_batch = cfg.max_batch.max(1);
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(cfg.timeout))
            .build()
            .into();
        Self { cfg, agent }
    }

    pub fn config(&self) -> &HttpProviderConfig {
        &self.cfg
    }

    fn url(&self, path: &str) -> String {
        format!("{}{}", self.cfg.endpoint, path)
    }

    pub fn health(&self) -> Result<HealthStatus, ProviderError> {
        let mut resp = self.agent.get(&self.url(HEALTH_PATH)).call().map_err(unavailable)?;
        resp.body_mut().read_json().map_err(unavailable)
    }

    /// Fails unless the service answers `ok` for this provider's model tag.
    pub fn ensure_healthy(&self) -> Result<HealthStatus, ProviderError> {
        let health = self.health()?;
        if !health.is_ok() {
            return Err(unavailable(format!("service status is `{}`", health.status)));
        }
        if health.model != self.cfg.model_tag {
            return Err(unavailable(format!(
                "service serves model `{}`, expected `{}`",
                health.model, self.cfg.model_tag
            )));
        }
        Ok(health)
    }

    fn post<B: Serialize>(&self, path: &str, body: &B, expected: usize) -> Result<Vec<EmbeddingVector>, ProviderError> {
        let mut resp = self
            .agent
            .post(&self.url(path))
            .send_json(body)
            .map_err(unavailable)?;
        let parsed: EmbedResponse = resp.body_mut().read_json().map_err(unavailable)?;
        decode_response(parsed, expected)
    }

    /// Splits `items` into batches and runs `call` on each with bounded
    /// concurrency, keeping the output in input order.
    fn batched<F>(&self, items: &[String], call: F) -> Result<Vec<EmbeddingVector>, ProviderError>
    where
        F: Fn(&[String]) -> Result<Vec<EmbeddingVector>, ProviderError> + Sync,
    {
        if items.is_empty() {
            return Err(ProviderError::EmptyBatch);
        }
        let batches: Vec<&[String]> = items.chunks(self.cfg.max_batch).collect();
        let mut out = Vec::with_capacity(items.len());
        for wave in batches.chunks(self.cfg.max_in_flight) {
            let results: Vec<_> = std::thread::scope(|scope| {
                let handles: Vec<_> = wave
                    .iter()
                    .map(|batch| scope.spawn(|| call(batch)))
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("embedding worker panicked"))
                    .collect()
            });
            for r in results {
                out.extend(r?);
            }
        }
        ingest_batch(out)
    }

    fn resolve(&self, frame_ref: &str) -> PathBuf {
        let p = Path::new(frame_ref);
        match &self.cfg.image_root {
            Some(root) if p.is_relative() => root.join(p),
            _ => p.to_path_buf(),
        }
    }

    fn encode_frames(&self, frame_refs: &[String]) -> Result<Vec<String>, ProviderError> {
        frame_refs
            .iter()
            .map(|r| {
                let bytes = fs::read(self.resolve(r)).map_err(|source| ProviderError::FrameIo {
                    frame_ref: r.clone(),
                    source,
                })?;
                Ok(base64::engine::general_purpose::STANDARD.encode(bytes))
            })
            .collect()
    }
}

/// Validates a service response against the request size and normalizes it.
pub fn decode_response(resp: EmbedResponse, expected: usize) -> Result<Vec<EmbeddingVector>, ProviderError> {
    if resp.embeddings.len() != expected {
        return Err(ProviderError::CountMismatch {
            expected,
            got: resp.embeddings.len(),
        });
    }
    let vectors = resp
        .embeddings
        .into_iter()
        .map(|values| {
            if values.len() != resp.dim {
                return Err(ProviderError::DimensionInconsistency {
                    first: resp.dim,
                    other: values.len(),
                });
            }
            Ok(EmbeddingVector::new(values)?)
        })
        .collect::<Result<Vec<_>, _>>()?;
    ingest_batch(vectors)
}

impl EmbeddingProvider for HttpProvider {
    fn model_tag(&self) -> &str {
        &self.cfg.model_tag
    }

    fn embed_text(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, ProviderError> {
        self.batched(texts, |batch| {
            let body = TextRequest {
                texts: batch.to_vec(),
                model: self.cfg.model_tag.clone(),
            };
            self.post(TEXT_PATH, &body, batch.len())
        })
    }

    fn embed_image(&self, frame_refs: &[String]) -> Result<Vec<EmbeddingVector>, ProviderError> {
        self.batched(frame_refs, |batch| {
            let body = ImageRequest {
                images_b64: self.encode_frames(batch)?,
                model: self.cfg.model_tag.clone(),
            };
            self.post(IMAGE_PATH, &body, batch.len())
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn response_validation() {
        let ok = EmbedResponse {
            dim: 2,
            embeddings: vec![vec![3.0, 4.0], vec![0.0, 2.0]],
        };
        let v = decode_response(ok.clone(), 2).unwrap();
        assert_eq!(v[0].values(), &[0.6, 0.8]);
        assert!(matches!(
            decode_response(ok, 3),
            Err(ProviderError::CountMismatch { expected: 3, got: 2 })
        ));
        let ragged = EmbedResponse {
            dim: 2,
            embeddings: vec![vec![1.0, 0.0], vec![1.0]],
        };
        assert!(matches!(
            decode_response(ragged, 2),
            Err(ProviderError::DimensionInconsistency { .. })
        ));
        let zero = EmbedResponse {
            dim: 1,
            embeddings: vec![vec![0.0]],
        };
        assert!(decode_response(zero, 1).is_err());
    }

    #[test]
    fn request_field_names() {
        let body = serde_json::to_value(TextRequest {
            texts: vec!["a".into()],
            model: "m".into(),
        })
        .unwrap();
        assert_eq!(body, serde_json::json!({"texts": ["a"], "model": "m"}));
        let body = serde_json::to_value(ImageRequest {
            images_b64: vec!["AA==".into()],
            model: "m".into(),
        })
        .unwrap();
        assert_eq!(body, serde_json::json!({"images_b64": ["AA=="], "model": "m"}));
    }

    #[test]
    fn unreachable_endpoint_is_unavailable() {
        let p = HttpProvider::new(HttpProviderConfig {
            timeout: Duration::from_millis(500),
            ..HttpProviderConfig::new("http://127.0.0.1:9", "m")
        });
        assert!(matches!(p.health(), Err(ProviderError::Unavailable(_))));
        assert!(matches!(
            p.embed_text(&["x".into()]),
            Err(ProviderError::Unavailable(_))
        ));
    }
}
