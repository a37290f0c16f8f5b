use std::fmt;

use reward_zero::bench::BenchError;
use reward_zero::cache::CacheError;
use reward_zero::manifest::ManifestError;
use reward_zero::potential::PotentialError;
use reward_zero::provider::ProviderError;
use reward_zero_rl::{PpoError, RlError};

/// Failure classes, each with its own process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad flags, configuration or input values (exit 1).
    Usage,
    /// Embedding provider or filesystem trouble (exit 2).
    Io,
    /// Non-finite or degenerate numbers during computation (exit 3).
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Usage,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Io,
            message: message.into(),
        }
    }

    pub fn numeric(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Numeric,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self.kind {
            ErrorKind::Usage => 1,
            ErrorKind::Io => 2,
            ErrorKind::Numeric => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::io(e.to_string())
    }
}

impl From<ManifestError> for CliError {
    fn from(e: ManifestError) -> Self {
        match e {
            ManifestError::Io { .. } => Self::io(e.to_string()),
            _ => Self::usage(e.to_string()),
        }
    }
}

impl From<CacheError> for CliError {
    fn from(e: CacheError) -> Self {
        Self::io(e.to_string())
    }
}

impl From<ProviderError> for CliError {
    fn from(e: ProviderError) -> Self {
        Self::io(e.to_string())
    }
}

impl From<PotentialError> for CliError {
    fn from(e: PotentialError) -> Self {
        match e {
            PotentialError::Embedding(_) => Self::numeric(e.to_string()),
            _ => Self::usage(e.to_string()),
        }
    }
}

impl From<BenchError> for CliError {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::Provider { .. } => Self::io(e.to_string()),
            BenchError::Potential(p) => p.into(),
            _ => Self::usage(e.to_string()),
        }
    }
}

impl From<RlError> for CliError {
    fn from(e: RlError) -> Self {
        match e {
            RlError::Io(_) | RlError::Csv(_) => Self::io(e.to_string()),
            RlError::Ppo(PpoError::NonFiniteGradient { .. }) => Self::numeric(e.to_string()),
            RlError::Potential(p) => p.into(),
            _ => Self::usage(e.to_string()),
        }
    }
}
