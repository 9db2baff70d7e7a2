//! Run configuration: a JSON file whose values command-line flags override.

use std::path::{Path, PathBuf};

use ftm_core::embedding::ProviderConfig;
use ftm_core::ingestion::{EndpointConfig, DEFAULT_PAGE_SIZE};
use ftm_core::label::LabelMatchConfig;
use ftm_core::matcher::{MatchConfig, Thresholds};
use ftm_core::model::{default_label_predicates, Iri};
use ftm_core::similarity::{DEFAULT_CATEGORICAL_THRESHOLD, DEFAULT_MIN_SUPPORT};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Every key accepted in a config file, with its default.
pub const CONFIG_KEYS: &str = "\
CONFIG FILE KEYS (JSON; flags override file values; unknown keys are errors):
  source                      graph file (.nt, .ttl, snapshot) or SPARQL endpoint URL
  target                      same, for the right-hand graph
  format                      \"ntriples\" | \"turtle\"; default: from the file extension
  endpoint.force              treat source/target as SPARQL endpoints [false]
  endpoint.page_size          rows per SPARQL page [10000]
  endpoint.named_graph        restrict queries to this graph IRI [none]
  endpoint.max_in_flight      concurrent page requests [2]
  endpoint.timeout_ms         per-request timeout [60000]
  endpoint.max_attempts       attempts per page [3]
  endpoint.backoff_ms         initial retry backoff [200]
  label_predicates            IRIs whose literals are labels [rdfs:label, skos:prefLabel, skos:altLabel]
  embedder.kind               \"local_trigram\" | \"remote\" [local_trigram]
  embedder.dimension          local: vector size [512]
  embedder.seed               local: hash seed [the top-level seed]
  embedder.base_url           remote: service URL
  embedder.timeout_ms         remote: request timeout [30000]
  embedder.batch_size         remote: texts per request [64]
  embedder.auth_token         remote: bearer token [none]
  embedder.max_in_flight      remote: concurrent requests [4]
  label.floor                 minimum label confidence kept [0.35]
  label.cross_product_limit   full cross product below this many elements [1000]
  k_top                       candidates per entity in each phase [10]
  max_iterations              1..=10 [10]
  thresholds.entity           entity acceptance / default eval threshold [0.90]
  thresholds.compatible       compatible triple threshold [0.60]
  thresholds.divergent        divergent triple threshold [0.25]
  categorical.threshold       max unique ratio of a categorical predicate [0.05]
  categorical.min_support     min triples of a categorical predicate [50]
  common_literal_cap          skip literals shared by more triples [1000]
  output_dir                  where result files are written [.]
  seed                        64-bit seed [0]
  threads                     worker threads [all cores]";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EndpointSettings {
    pub force: bool,
    pub page_size: usize,
    pub named_graph: Option<Iri>,
    pub max_in_flight: usize,
    pub timeout_ms: u64,
    pub max_attempts: u32,
    pub backoff_ms: u64,
}

impl Default for EndpointSettings {
    fn default() -> Self {
        let base = EndpointConfig::new("");
        Self {
            force: false,
            page_size: DEFAULT_PAGE_SIZE,
            named_graph: None,
            max_in_flight: base.max_in_flight,
            timeout_ms: base.timeout_ms,
            max_attempts: base.max_attempts,
            backoff_ms: base.backoff_ms,
        }
    }
}

impl EndpointSettings {
    pub fn to_config(&self, url: &str) -> EndpointConfig {
        EndpointConfig {
            url: url.to_string(),
            page_size: self.page_size,
            named_graph: self.named_graph.clone(),
            max_in_flight: self.max_in_flight,
            timeout_ms: self.timeout_ms,
            max_attempts: self.max_attempts,
            backoff_ms: self.backoff_ms,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CategoricalSettings {
    pub threshold: f64,
    pub min_support: u64,
}

impl Default for CategoricalSettings {
    fn default() -> Self {
        Self { threshold: DEFAULT_CATEGORICAL_THRESHOLD, min_support: DEFAULT_MIN_SUPPORT }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub source: Option<String>,
    pub target: Option<String>,
    pub format: Option<String>,
    pub endpoint: EndpointSettings,
    pub label_predicates: Vec<Iri>,
    pub embedder: Option<ProviderConfig>,
    pub label: LabelMatchConfig,
    pub k_top: usize,
    pub max_iterations: usize,
    pub thresholds: Thresholds,
    pub categorical: CategoricalSettings,
    pub common_literal_cap: usize,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let m = MatchConfig::default();
        Self {
            source: None,
            target: None,
            format: None,
            endpoint: EndpointSettings::default(),
            label_predicates: default_label_predicates(),
            embedder: None,
            label: LabelMatchConfig::default(),
            k_top: m.k_top,
            max_iterations: m.max_iterations,
            thresholds: m.thresholds,
            categorical: CategoricalSettings::default(),
            common_literal_cap: m.common_literal_cap,
            output_dir: PathBuf::from("."),
            seed: 0,
            threads: None,
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("reading {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let t = &self.thresholds;
        for (name, v) in [
            ("thresholds.entity", t.entity),
            ("thresholds.compatible", t.compatible),
            ("thresholds.divergent", t.divergent),
            ("label.floor", self.label.floor),
            ("categorical.threshold", self.categorical.threshold),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(CliError::config(format!("{name} must be in [0, 1], got {v}")));
            }
        }
        if !(1..=10).contains(&self.max_iterations) {
            return Err(CliError::config(format!("max_iterations must be in 1..=10, got {}", self.max_iterations)));
        }
        if self.k_top == 0 {
            return Err(CliError::config("k_top must be at least 1"));
        }
        if self.threads == Some(0) {
            return Err(CliError::config("threads must be at least 1"));
        }
        if let Some(f) = &self.format {
            if !matches!(f.as_str(), "ntriples" | "nt" | "turtle" | "ttl") {
                return Err(CliError::config(format!("unknown format {f:?}")));
            }
        }
        self.provider().validate().map_err(|e| CliError::config(e.to_string()))
    }

    /// The configured embedder, seeded from the run seed when local.
    pub fn provider(&self) -> ProviderConfig {
        match &self.embedder {
            Some(p) => p.clone(),
            None => match ProviderConfig::default() {
                ProviderConfig::LocalTrigram { dimension, .. } => ProviderConfig::LocalTrigram { dimension, seed: self.seed },
                other => other,
            },
        }
    }

    pub fn match_config(&self) -> MatchConfig {
        MatchConfig {
            k_top: self.k_top,
            max_iterations: self.max_iterations,
            common_literal_cap: self.common_literal_cap,
            thresholds: self.thresholds,
            categorical_threshold: self.categorical.threshold,
            categorical_min_support: self.categorical.min_support,
            ..MatchConfig::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = RunConfig::default();
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&json).unwrap(), c);
        c.validate().unwrap();
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"k_topp": 3}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"thresholds": {"entity": 0.5, "x": 1}}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"embedder": {"kind": "local", "bogus": 1}}"#).is_err());
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let c: RunConfig = serde_json::from_str(r#"{"k_top": 3, "thresholds": {"compatible": 0.7}}"#).unwrap();
        assert_eq!(c.k_top, 3);
        assert_eq!(c.thresholds.compatible, 0.7);
        assert_eq!(c.thresholds.entity, 0.90);
        assert_eq!(c.max_iterations, 10);
    }

    #[test]
    fn help_lists_every_key() {
        let json = serde_json::to_value(RunConfig { embedder: Some(ProviderConfig::default()), ..Default::default() }).unwrap();
        let mut keys = Vec::new();
        for (k, v) in json.as_object().unwrap() {
            match v.as_object() {
                Some(inner) if !inner.is_empty() => keys.extend(inner.keys().map(|i| format!("{k}.{i}"))),
                _ => keys.push(k.clone()),
            }
        }
        for key in keys {
            assert!(CONFIG_KEYS.contains(&format!("  {key} ")), "{key} missing from help");
        }
    }

    #[test]
    fn validation_bounds() {
        let bad = RunConfig { max_iterations: 11, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = RunConfig { thresholds: Thresholds { entity: 1.5, ..Default::default() }, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
