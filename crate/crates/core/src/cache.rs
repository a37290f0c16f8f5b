//! Line-oriented embedding cache.
//!
//! One JSON object per line with the fields `id`, `kind`, `model_tag`, `dim`
//! and `values`. Floats are written in shortest round-trip form, so a write
//! followed by a read reproduces every vector bitwise.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::{EmbeddingError, EmbeddingVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingKind {
    Image,
    Text,
}

impl std::fmt::Display for EmbeddingKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EmbeddingKind::Image => "image",
            EmbeddingKind::Text => "text",
        })
    }
}

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("cache io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cache line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("duplicate cache id `{id}` for kind {kind} and model `{model_tag}`")]
    DuplicateId {
        id: String,
        kind: EmbeddingKind,
        model_tag: String,
    },
    #[error("cache entry `{id}`: {source}")]
    InvalidVector {
        id: String,
        #[source]
        source: EmbeddingError,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingCacheEntry {
    pub id: String,
    pub kind: EmbeddingKind,
    pub model_tag: String,
    pub vector: EmbeddingVector,
}

impl EmbeddingCacheEntry {
    /// Normalizes `vector` on the way in.
    pub fn new(
        id: impl Into<String>,
        kind: EmbeddingKind,
        model_tag: impl Into<String>,
        vector: EmbeddingVector,
    ) -> Result<Self, CacheError> {
        let id = id.into();
        let vector = vector
            .normalized()
            .map_err(|source| CacheError::InvalidVector { id: id.clone(), source })?;
        Ok(Self {
            id,
            kind,
            model_tag: model_tag.into(),
            vector,
        })
    }

    fn key(&self) -> CacheKey {
        (self.kind, self.model_tag.clone(), self.id.clone())
    }
}

#[derive(Serialize, Deserialize)]
struct CacheLine {
    id: String,
    kind: EmbeddingKind,
    model_tag: String,
    dim: usize,
    values: Vec<f64>,
}

type CacheKey = (EmbeddingKind, String, String);

/// In-memory view of a cache file. Read-only after load, so it may be shared
/// across threads freely.
#[derive(Debug, Clone, Default)]
pub struct EmbeddingCache {
    entries: Vec<EmbeddingCacheEntry>,
    index: HashMap<CacheKey, usize>,
}

impl EmbeddingCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries(entries: Vec<EmbeddingCacheEntry>) -> Result<Self, CacheError> {
        let mut cache = Self::new();
        for e in entries {
            cache.insert(e)?;
        }
        Ok(cache)
    }

    pub fn insert(&mut self, entry: EmbeddingCacheEntry) -> Result<(), CacheError> {
        let key = entry.key();
        if self.index.contains_key(&key) {
            return Err(CacheError::DuplicateId {
                id: entry.id,
                kind: entry.kind,
                model_tag: entry.model_tag,
            });
        }
        self.index.insert(key, self.entries.len());
        self.entries.push(entry);
        Ok(())
    }

    pub fn get(&self, kind: EmbeddingKind, model_tag: &str, id: &str) -> Option<&EmbeddingVector> {
        self.index
            .get(&(kind, model_tag.to_string(), id.to_string()))
            .map(|&i| &self.entries[i].vector)
    }

    pub fn contains(&self, kind: EmbeddingKind, model_tag: &str, id: &str) -> bool {
        self.get(kind, model_tag, id).is_some()
    }

    pub fn entries(&self) -> &[EmbeddingCacheEntry] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<EmbeddingCacheEntry> {
        self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Model tags present, in first-seen order.
    pub fn model_tags(&self) -> Vec<String> {
        let mut tags: Vec<String> = Vec::new();
        for e in &self.entries {
            if !tags.contains(&e.model_tag) {
                tags.push(e.model_tag.clone());
            }
        }
        tags
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, CacheError> {
        Self::from_entries(read_cache(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<(), CacheError> {
        write_cache(path, &self.entries)
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CacheError + '_ {
    move |source| CacheError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn encode_line(entry: &EmbeddingCacheEntry) -> String {
    let line = CacheLine {
        id: entry.id.clone(),
        kind: entry.kind,
        model_tag: entry.model_tag.clone(),
        dim: entry.vector.dim(),
        values: entry.vector.values().to_vec(),
    };
    serde_json::to_string(&line).expect("cache lines always serialize")
}

pub fn decode_line(text: &str, line: usize) -> Result<EmbeddingCacheEntry, CacheError> {
    let parsed: CacheLine = serde_json::from_str(text).map_err(|e| CacheError::Parse {
        line,
        reason: e.to_string(),
    })?;
    if parsed.dim != parsed.values.len() {
        return Err(CacheError::Parse {
            line,
            reason: format!("dim {} but {} values", parsed.dim, parsed.values.len()),
        });
    }
    let vector = EmbeddingVector::new(parsed.values).map_err(|source| CacheError::InvalidVector {
        id: parsed.id.clone(),
        source,
    })?;
    EmbeddingCacheEntry::new(parsed.id, parsed.kind, parsed.model_tag, vector)
}

/// Writes entries in order, rejecting duplicate `(kind, model_tag, id)`.
pub fn write_cache(path: impl AsRef<Path>, entries: &[EmbeddingCacheEntry]) -> Result<(), CacheError> {
    let path = path.as_ref();
    let mut seen = HashMap::new();
    for e in entries {
        if seen.insert(e.key(), ()).is_some() {
            return Err(CacheError::DuplicateId {
                id: e.id.clone(),
                kind: e.kind,
                model_tag: e.model_tag.clone(),
            });
        }
    }
    let mut out = BufWriter::new(File::create(path).map_err(io_err(path))?);
    for e in entries {
        writeln!(out, "{}", encode_line(e)).map_err(io_err(path))?;
    }
    out.flush().map_err(io_err(path))
}

/// Reads every entry; blank lines are skipped. Duplicates are rejected.
pub fn read_cache(path: impl AsRef<Path>) -> Result<Vec<EmbeddingCacheEntry>, CacheError> {
    let path = path.as_ref();
    let reader = BufReader::new(File::open(path).map_err(io_err(path))?);
    let mut entries = Vec::new();
    let mut seen = HashMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let entry = decode_line(&line, i + 1)?;
        if seen.insert(entry.key(), ()).is_some() {
            return Err(CacheError::DuplicateId {
                id: entry.id,
                kind: entry.kind,
                model_tag: entry.model_tag,
            });
        }
        entries.push(entry);
    }
    Ok(entries)
}

/// Writes `entries` to `path` and reads them back.
pub fn cache_roundtrip(
    path: impl AsRef<Path>,
    entries: &[EmbeddingCacheEntry],
) -> Result<Vec<EmbeddingCacheEntry>, CacheError> {
    write_cache(&path, entries)?;
    read_cache(&path)
}
