//! Fixed-dimension embedding vectors and cosine similarity.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Norms below this are treated as a zero vector.
pub const ZERO_NORM: f64 = 1e-12;

/// Vectors whose norm is already this close to one are left untouched by
/// [`EmbeddingVector::normalized`], so normalizing twice is bitwise stable.
const UNIT_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EmbeddingError {
    #[error("embedding must have at least one component")]
    Empty,
    #[error("embedding component {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("embedding has zero norm")]
    ZeroVector,
}

/// A finite, non-empty real vector.
///
/// Construction checks finiteness only; use [`EmbeddingVector::unit`] (or
/// [`EmbeddingVector::normalized`]) at ingestion points so downstream
/// similarity is a plain dot product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct EmbeddingVector {
    values: Vec<f64>,
}

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Result<Self, EmbeddingError> {
        if values.is_empty() {
            return Err(EmbeddingError::Empty);
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(EmbeddingError::NonFinite { index, value });
        }
        Ok(Self { values })
    }

    /// Validates and L2-normalizes in one step.
    pub fn unit(values: Vec<f64>) -> Result<Self, EmbeddingError> {
        Self::new(values)?.normalized()
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_unit(&self, tolerance: f64) -> bool {
        (self.norm() - 1.0).abs() <= tolerance
    }

    /// Returns the unit-norm copy of this vector.
    pub fn normalized(&self) -> Result<Self, EmbeddingError> {
        let norm = self.norm();
        if norm < ZERO_NORM {
            return Err(EmbeddingError::ZeroVector);
        }
        if (norm - 1.0).abs() <= UNIT_SLACK {
            return Ok(self.clone());
        }
        Ok(Self {
            values: self.values.iter().map(|v| v / norm).collect(),
        })
    }

    pub fn dot(&self, other: &Self) -> Result<f64, EmbeddingError> {
        check_dims(self, other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum())
    }

    pub fn scaled(&self, factor: f64) -> Result<Self, EmbeddingError> {
        Self::new(self.values.iter().map(|v| v * factor).collect())
    }
}

impl TryFrom<Vec<f64>> for EmbeddingVector {
    type Error = EmbeddingError;

    fn try_from(values: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(values)
    }
}

impl From<EmbeddingVector> for Vec<f64> {
    fn from(v: EmbeddingVector) -> Self {
        v.values
    }
}

fn check_dims(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<(), EmbeddingError> {
    if a.dim() != b.dim() {
        return Err(EmbeddingError::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    Ok(())
}

/// `(a·b) / (‖a‖‖b‖)`, clamped to `[-1, 1]`.
pub fn cosine_similarity(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64, EmbeddingError> {
    check_dims(a, b)?;
    let (na, nb) = (a.norm(), b.norm());
    if na < ZERO_NORM || nb < ZERO_NORM {
        return Err(EmbeddingError::ZeroVector);
    }
    let dot: f64 = a.values.iter().zip(&b.values).map(|(x, y)| x * y).sum();
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}
