use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{EmbeddingError, EmbeddingProvider, EmbeddingVector, ProviderConfig};

const NORM_TOLERANCE: f64 = 1e-3;

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: &'a [String],
}

#[derive(Deserialize)]
struct EmbedResponse {
    model: String,
    dimension: usize,
    vectors: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct HealthStatus {
    pub status: String,
    #[serde(default)]
    pub model: Option<String>,
}

/// HTTP client for an embedding service.
///
/// Texts are split into `batch_size` chunks; up to `max_in_flight` chunks
/// are posted concurrently and results are reassembled in input order.
/// Empty strings never leave the process: they map to the zero vector.
pub struct RemoteProvider {
    agent: ureq::Agent,
    base_url: String,
    batch_size: usize,
    max_in_flight: usize,
    auth_token: Option<String>,
    max_attempts: u32,
    backoff: Duration,
}

impl RemoteProvider {
    pub fn from_config(cfg: &ProviderConfig) -> Result<Self, EmbeddingError> {
        cfg.validate()?;
        let ProviderConfig::Remote { base_url, timeout_ms, batch_size, auth_token, max_in_flight } = cfg else {
            return Err(EmbeddingError::Config("not a remote provider config".into()));
        };
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_millis(*timeout_ms)))
            .build()
            .into();
        Ok(Self {
            agent,
            base_url: base_url.trim_end_matches('/').to_string(),
            batch_size: *batch_size,
            max_in_flight: *max_in_flight,
            auth_token: auth_token.clone(),
            max_attempts: 3,
            backoff: Duration::from_millis(100),
        })
    }

    pub fn with_retry(mut self, max_attempts: u32, backoff: Duration) -> Self {
        self.max_attempts = max_attempts.max(1);
        self.backoff = backoff;
        self
    }

    pub fn health(&self) -> Result<HealthStatus, EmbeddingError> {
        let mut resp = self
            .agent
            .get(format!("{}/health", self.base_url))
            .call()
            .map_err(|e| http_error(e, 1))?;
        resp.body_mut()
            .read_json::<HealthStatus>()
            .map_err(|e| EmbeddingError::Protocol(e.to_string()))
    }

    fn post_once(&self, texts: &[String]) -> Result<EmbedResponse, ureq::Error> {
        let mut req = self.agent.post(format!("{}/embed", self.base_url));
        if let Some(token) = &self.auth_token {
            req = req.header("Authorization", format!("Bearer {token}"));
        }
        let mut resp = req.send_json(EmbedRequest { texts })?;
        resp.body_mut().read_json::<EmbedResponse>()
    }

    fn post_batch(&self, texts: &[String]) -> Result<(String, Vec<EmbeddingVector>), EmbeddingError> {
        let mut attempt = 0;
        let response = loop {
            attempt += 1;
            match self.post_once(texts) {
                Ok(r) => break r,
                Err(e) if attempt < self.max_attempts && retryable(&e) => {
                    log::warn!("embedding request attempt {attempt} failed: {e}");
                    thread::sleep(self.backoff * 2u32.pow(attempt - 1));
                }
                Err(e) => return Err(http_error(e, attempt)),
            }
        };
        if response.vectors.len() != texts.len() {
            return Err(EmbeddingError::Protocol(format!(
                "expected {} vectors, got {}",
                texts.len(),
                response.vectors.len()
            )));
        }
        let mut out = Vec::with_capacity(texts.len());
        for v in response.vectors {
            if v.len() != response.dimension {
                return Err(EmbeddingError::DimensionMismatch { left: response.dimension, right: v.len() });
            }
            let vector = EmbeddingVector::normalized(v.clone());
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !vector.is_zero() && (norm - 1.0).abs() > NORM_TOLERANCE {
                return Err(EmbeddingError::Protocol(format!("vector norm {norm} is not unit")));
            }
            out.push(vector);
        }
        Ok((response.model, out))
    }
}

fn retryable(e: &ureq::Error) -> bool {
    match e {
        ureq::Error::StatusCode(code) => *code >= 500 || *code == 429,
        ureq::Error::Timeout(_) | ureq::Error::Io(_) | ureq::Error::ConnectionFailed => true,
        _ => false,
    }
}

fn http_error(e: ureq::Error, attempts: u32) -> EmbeddingError {
    let status = match &e {
        ureq::Error::StatusCode(code) => Some(*code),
        _ => None,
    };
    EmbeddingError::Provider { status, attempts, message: e.to_string() }
}

impl EmbeddingProvider for RemoteProvider {
    fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbeddingError> {
        let pending: Vec<(usize, String)> = texts
            .iter()
            .enumerate()
            .filter(|(_, t)| !t.is_empty())
            .map(|(i, t)| (i, t.clone()))
            .collect();
        let chunks: Vec<&[(usize, String)]> = pending.chunks(self.batch_size).collect();
        let mut slots: Vec<Option<EmbeddingVector>> = vec![None; texts.len()];
        let mut dimension: Option<usize> = None;
        for window in chunks.chunks(self.max_in_flight) {
            let results: Vec<Result<(String, Vec<EmbeddingVector>), EmbeddingError>> = thread::scope(|scope| {
                let handles: Vec<_> = window
                    .iter()
                    .map(|chunk| {
                        let batch: Vec<String> = chunk.iter().map(|(_, t)| t.clone()).collect();
                        scope.spawn(move || self.post_batch(&batch))
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("embedding worker panicked")).collect()
            });
            for (chunk, result) in window.iter().zip(results) {
                let (_, vectors) = result?;
                for ((idx, _), v) in chunk.iter().zip(vectors) {
                    match dimension {
                        Some(d) if d != v.dimension() => {
                            return Err(EmbeddingError::DimensionMismatch { left: d, right: v.dimension() })
                        }
                        _ => dimension = Some(v.dimension()),
                    }
                    slots[*idx] = Some(v);
                }
            }
        }
        let dimension = dimension.unwrap_or(1);
        Ok(slots.into_iter().map(|s| s.unwrap_or_else(|| EmbeddingVector::zero(dimension))).collect())
    }

    fn model_name(&self) -> String {
        self.health()
            .ok()
            .and_then(|h| h.model)
            .unwrap_or_else(|| format!("remote:{}", self.base_url))
    }
}
