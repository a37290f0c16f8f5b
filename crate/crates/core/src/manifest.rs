//! Benchmark episode manifests.
//!
//! A manifest is a single JSON document:
//!
//! ```json
//! {
//!   "version": 1,
//!   "episodes": [
//!     {
//!       "task_name": "OpenCabinetDrawer",
//!       "goal_text": "The cabinet drawer is fully open",
//!       "keyframes": [
//!         { "frame_ref": "frames/drawer_a/000.png", "completion_pct": 0 },
//!         { "frame_ref": "frames/drawer_a/100.png", "completion_pct": 100 }
//!       ]
//!     }
//!   ]
//! }
//! ```
//!
//! Goals should describe the end state ("The drawer is fully open") rather
//! than the action ("Open the drawer"); action phrasing invites captioners to
//! echo the goal before anything has happened.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("cannot read manifest {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("{}", describe_validation(.episode, .field, .reason))]
    Validation {
        episode: Option<usize>,
        field: String,
        reason: String,
    },
}

fn describe_validation(episode: &Option<usize>, field: &str, reason: &str) -> String {
    match episode {
        Some(i) => format!("episode {i}: field `{field}`: {reason}"),
        None => format!("field `{field}`: {reason}"),
    }
}

fn invalid(episode: Option<usize>, field: &str, reason: impl Into<String>) -> ManifestError {
    ManifestError::Validation {
        episode,
        field: field.to_string(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Keyframe {
    pub frame_ref: String,
    pub completion_pct: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Episode {
    pub task_name: String,
    pub goal_text: String,
    pub keyframes: Vec<Keyframe>,
}

impl Episode {
    /// The baseline observation is always the 0% frame.
    pub fn baseline_index(&self) -> usize {
        0
    }

    pub fn forward_transitions(&self) -> usize {
        self.keyframes.len().saturating_sub(1)
    }

    pub fn completions(&self) -> Vec<f64> {
        self.keyframes.iter().map(|k| f64::from(k.completion_pct)).collect()
    }

    pub fn frame_refs(&self) -> Vec<String> {
        self.keyframes.iter().map(|k| k.frame_ref.clone()).collect()
    }

    fn validate(&self, index: usize) -> Result<(), ManifestError> {
        let at = Some(index);
        if self.task_name.trim().is_empty() {
            return Err(invalid(at, "task_name", "must be nonempty"));
        }
        if self.goal_text.trim().is_empty() {
            return Err(invalid(at, "goal_text", "must be nonempty"));
        }
        if self.keyframes.len() < 2 {
            return Err(invalid(
                at,
                "keyframes",
                format!("need at least 2 keyframes, found {}", self.keyframes.len()),
            ));
        }
        if self.keyframes[0].completion_pct != 0 {
            return Err(invalid(at, "completion_pct", "first keyframe must be at 0%"));
        }
        for (j, kf) in self.keyframes.iter().enumerate() {
            if kf.frame_ref.trim().is_empty() {
                return Err(invalid(at, "frame_ref", format!("keyframe {j} has an empty reference")));
            }
            if kf.completion_pct > 100 {
                return Err(invalid(
                    at,
                    "completion_pct",
                    format!("keyframe {j} exceeds 100 ({})", kf.completion_pct),
                ));
            }
        }
        for (j, pair) in self.keyframes.windows(2).enumerate() {
            if pair[1].completion_pct <= pair[0].completion_pct {
                return Err(invalid(
                    at,
                    "completion_pct",
                    format!(
                        "completions must strictly increase: keyframe {} ({}) follows {}",
                        j + 1,
                        pair[1].completion_pct,
                        pair[0].completion_pct
                    ),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub episodes: Vec<Episode>,
}

impl Manifest {
    pub fn new(episodes: Vec<Episode>) -> Self {
        Self {
            version: MANIFEST_VERSION,
            episodes,
        }
    }

    pub fn validate(&self) -> Result<(), ManifestError> {
        if self.version != MANIFEST_VERSION {
            return Err(invalid(
                None,
                "version",
                format!("unsupported version {} (expected {MANIFEST_VERSION})", self.version),
            ));
        }
        if self.episodes.is_empty() {
            return Err(invalid(None, "episodes", "manifest contains no episodes"));
        }
        for (i, ep) in self.episodes.iter().enumerate() {
            ep.validate(i)?;
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, ManifestError> {
        let manifest: Manifest = serde_json::from_str(text)?;
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn to_json(&self) -> Result<String, ManifestError> {
        self.validate()?;
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    pub fn forward_transitions(&self) -> usize {
        self.episodes.iter().map(Episode::forward_transitions).sum()
    }

    pub fn keyframe_count(&self) -> usize {
        self.episodes.iter().map(|e| e.keyframes.len()).sum()
    }
}

/// Reads and validates a manifest, returning its episodes.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<Vec<Episode>, ManifestError> {
    Ok(read_manifest(path)?.episodes)
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Manifest, ManifestError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ManifestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Manifest::from_json(&text)
}

pub fn save_manifest(path: impl AsRef<Path>, episodes: &[Episode]) -> Result<(), ManifestError> {
    let path = path.as_ref();
    let text = Manifest::new(episodes.to_vec()).to_json()?;
    fs::write(path, text).map_err(|source| ManifestError::Io {
        path: path.display().to_string(),
        source,
    })
}
