//! Text embedding providers and cosine similarity.
//!
//! The local provider hashes character trigrams into a fixed number of
//! buckets; the remote provider talks to an embedding service over HTTP
//! (`POST /embed`, `GET /health`).

#[cfg(feature = "io")]
mod remote;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use xxhash_rust::xxh3::xxh3_64_with_seed;

#[cfg(feature = "io")]
pub use remote::{HealthStatus, RemoteProvider};

pub const DEFAULT_DIMENSION: usize = 512;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmbeddingError {
    #[error("embedding provider request failed after {attempts} attempt(s){}: {message}", status.map(|s| format!(" (HTTP {s})")).unwrap_or_default())]
    Provider { status: Option<u16>, attempts: u32, message: String },
    #[error("embedding protocol error: {0}")]
    Protocol(String),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("invalid provider config: {0}")]
    Config(String),
}

/// A unit-norm vector, or the zero vector for empty text.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector {
    values: Vec<f64>,
}

impl EmbeddingVector {
    pub fn zero(dimension: usize) -> Self {
        Self { values: vec![0.0; dimension] }
    }

    /// L2-normalizes `values`; an all-zero input stays zero.
    pub fn normalized(mut values: Vec<f64>) -> Self {
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            values.iter_mut().for_each(|v| *v /= norm);
        }
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dimension(&self) -> usize {
        self.values.len()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }
}

/// Cosine similarity in [-1, 1]. A zero vector scores 0 against anything.
pub fn cosine(u: &EmbeddingVector, v: &EmbeddingVector) -> Result<f64, EmbeddingError> {
    if u.dimension() != v.dimension() {
        return Err(EmbeddingError::DimensionMismatch { left: u.dimension(), right: v.dimension() });
    }
    let (nu, nv) = (u.norm(), v.norm());
    if nu == 0.0 || nv == 0.0 {
        return Ok(0.0);
    }
    let dot: f64 = u.values.iter().zip(&v.values).map(|(a, b)| a * b).sum();
    Ok((dot / (nu * nv)).clamp(-1.0, 1.0))
}

/// Cosine clamped to [0, 1] for use as a label confidence.
pub fn label_cosine(u: &EmbeddingVector, v: &EmbeddingVector) -> f64 {
    cosine(u, v).map_or(0.0, |c| c.clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProviderConfig {
    #[serde(alias = "local")]
    LocalTrigram {
        #[serde(default = "default_dimension")]
        dimension: usize,
        #[serde(default)]
        seed: u64,
    },
    Remote {
        base_url: String,
        #[serde(default = "default_timeout_ms")]
        timeout_ms: u64,
        #[serde(default = "default_batch_size")]
        batch_size: usize,
        #[serde(default)]
        auth_token: Option<String>,
        #[serde(default = "default_in_flight")]
        max_in_flight: usize,
    },
}

fn default_dimension() -> usize {
    DEFAULT_DIMENSION
}
fn default_timeout_ms() -> u64 {
    30_000
}
fn default_batch_size() -> usize {
    64
}
fn default_in_flight() -> usize {
    4
}

impl Default for ProviderConfig {
    fn default() -> Self {
        ProviderConfig::LocalTrigram { dimension: DEFAULT_DIMENSION, seed: 0 }
    }
}

impl ProviderConfig {
    pub fn remote(base_url: impl Into<String>) -> Self {
        ProviderConfig::Remote {
            base_url: base_url.into(),
            timeout_ms: default_timeout_ms(),
            batch_size: default_batch_size(),
            auth_token: None,
            max_in_flight: default_in_flight(),
        }
    }

    pub fn validate(&self) -> Result<(), EmbeddingError> {
        match self {
            ProviderConfig::LocalTrigram { dimension, .. } if *dimension < 16 => {
                Err(EmbeddingError::Config(format!("dimension must be >= 16, got {dimension}")))
            }
            ProviderConfig::Remote { batch_size: 0, .. } => {
                Err(EmbeddingError::Config("batch_size must be >= 1".into()))
            }
            ProviderConfig::Remote { max_in_flight: 0, .. } => {
                Err(EmbeddingError::Config("max_in_flight must be >= 1".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn build(&self) -> Result<Box<dyn EmbeddingProvider>, EmbeddingError> {
        self.validate()?;
        match self {
            ProviderConfig::LocalTrigram { dimension, seed } => {
                Ok(Box::new(LocalTrigramProvider::new(*dimension, *seed)))
            }
            #[cfg(feature = "io")]
            ProviderConfig::Remote { .. } => Ok(Box::new(RemoteProvider::from_config(self)?)),
            #[cfg(not(feature = "io"))]
            ProviderConfig::Remote { .. } => {
                Err(EmbeddingError::Config("remote provider requires the `io` feature".into()))
            }
        }
    }
}

pub trait EmbeddingProvider: Send + Sync {
    /// One vector per input, in input order.
    fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbeddingError>;

    fn model_name(&self) -> String;
}

/// Builds the configured provider and embeds `texts` with it.
pub fn embed_batch(texts: &[String], cfg: &ProviderConfig) -> Result<Vec<EmbeddingVector>, EmbeddingError> {
    cfg.build()?.embed_batch(texts)
}

/// Hashes lowercased character trigrams into `dimension` buckets with a
/// seeded xxh3, then L2-normalizes. Strings shorter than three characters
/// contribute a single gram; empty strings map to the zero vector.
#[derive(Debug, Clone)]
pub struct LocalTrigramProvider {
    dimension: usize,
    seed: u64,
}

impl Default for LocalTrigramProvider {
    fn default() -> Self {
        Self::new(DEFAULT_DIMENSION, 0)
    }
}

impl LocalTrigramProvider {
    pub fn new(dimension: usize, seed: u64) -> Self {
        Self { dimension: dimension.max(1), seed }
    }

    pub fn embed(&self, text: &str) -> EmbeddingVector {
        let chars: Vec<char> = text.to_lowercase().chars().collect();
        if chars.is_empty() {
            return EmbeddingVector::zero(self.dimension);
        }
        let mut buckets = vec![0.0; self.dimension];
        let mut gram = String::with_capacity(12);
        let mut add = |g: &[char]| {
            gram.clear();
            gram.extend(g);
            let h = xxh3_64_with_seed(gram.as_bytes(), self.seed);
            buckets[(h % self.dimension as u64) as usize] += 1.0;
        };
        if chars.len() < 3 {
            add(&chars);
        } else {
            chars.windows(3).for_each(add);
        }
        EmbeddingVector::normalized(buckets)
    }
}

impl EmbeddingProvider for LocalTrigramProvider {
    fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbeddingError> {
        Ok(texts.iter().map(|t| self.embed(t)).collect())
    }

    fn model_name(&self) -> String {
        format!("local-trigram-{}-seed{}", self.dimension, self.seed)
    }
}
