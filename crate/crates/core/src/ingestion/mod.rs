//! Loading graphs from RDF files and SPARQL endpoints, the common-literal
//! set, and binary index snapshots.

#[cfg(feature = "io")]
mod rdf;
mod snapshot;
#[cfg(feature = "io")]
mod sparql;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Iri, KnowledgeGraph, LiteralId, LiteralKey, TripleId};

#[cfg(feature = "io")]
pub use rdf::{load_reader, parse_ntriples_str};
pub use snapshot::{snapshot_load, snapshot_save, SnapshotError, SNAPSHOT_MAGIC, SNAPSHOT_VERSION};
#[cfg(feature = "io")]
pub use sparql::fetch_endpoint;

pub const DEFAULT_PAGE_SIZE: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RdfFormat {
    NTriples,
    Turtle,
}

impl RdfFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "nt" | "ntriples" => Some(RdfFormat::NTriples),
            "ttl" | "turtle" => Some(RdfFormat::Turtle),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointConfig {
    pub url: String,
    pub page_size: usize,
    pub named_graph: Option<Iri>,
    pub max_in_flight: usize,
    pub timeout_ms: u64,
    pub max_attempts: u32,
    pub backoff_ms: u64,
}

impl EndpointConfig {
    pub fn new(url: impl Into<String>) -> Self {
        Self {
            url: url.into(),
            page_size: DEFAULT_PAGE_SIZE,
            named_graph: None,
            max_in_flight: 2,
            timeout_ms: 60_000,
            max_attempts: 3,
            backoff_ms: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GraphSource {
    File { path: PathBuf, format: RdfFormat },
    Endpoint(EndpointConfig),
}

impl GraphSource {
    /// Endpoint for `http(s)://` locations, otherwise a file whose format is
    /// taken from the extension.
    pub fn detect(location: &str) -> Result<Self, IngestError> {
        if location.starts_with("http://") || location.starts_with("https://") {
            return Ok(GraphSource::Endpoint(EndpointConfig::new(location)));
        }
        Self::file(location)
    }

    pub fn file(path: impl Into<PathBuf>) -> Result<Self, IngestError> {
        let path = path.into();
        let format = RdfFormat::from_path(&path)
            .ok_or_else(|| IngestError::UnsupportedFormat(path.display().to_string()))?;
        Ok(GraphSource::File { path, format })
    }

    pub fn validate(&self) -> Result<(), IngestError> {
        match self {
            GraphSource::Endpoint(cfg) if cfg.page_size == 0 => {
                Err(IngestError::InvalidSource("page_size must be at least 1".into()))
            }
            GraphSource::Endpoint(cfg) if cfg.max_in_flight == 0 => {
                Err(IngestError::InvalidSource("max_in_flight must be at least 1".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}:{line}: byte {offset}: {message}")]
    Parse { path: String, line: u64, offset: u64, message: String },
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("endpoint {url} failed after {attempts} attempt(s){}: {message}", status.map(|s| format!(" with HTTP {s}")).unwrap_or_default())]
    Endpoint { url: String, status: Option<u16>, attempts: u32, message: String },
    #[error("unsupported RDF format for {0} (expected .nt or .ttl)")]
    UnsupportedFormat(String),
    #[error("invalid graph source: {0}")]
    InvalidSource(String),
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
}

/// Loads a graph, collecting labels from `label_predicates`.
#[cfg(feature = "io")]
pub fn load_graph(source: &GraphSource, label_predicates: &[Iri]) -> Result<KnowledgeGraph, IngestError> {
    source.validate()?;
    match source {
        GraphSource::File { path, format } => {
            let file = std::fs::File::open(path)
                .map_err(|source| IngestError::Io { path: path.display().to_string(), source })?;
            let reader = std::io::BufReader::with_capacity(1 << 16, file);
            load_reader(reader, *format, label_predicates, &path.display().to_string())
        }
        GraphSource::Endpoint(cfg) => fetch_endpoint(cfg, label_predicates),
    }
}

/// Literals present in both graphs, compared on lexical form and datatype,
/// with the triples of each graph whose object is one of them.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CommonLiteralSet {
    pub values: BTreeSet<(String, Option<Iri>)>,
    pub left_literals: Vec<LiteralId>,
    pub right_literals: Vec<LiteralId>,
    pub left_triples: Vec<TripleId>,
    pub right_triples: Vec<TripleId>,
}

impl CommonLiteralSet {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn identity(key: LiteralKey) -> (String, Option<Iri>) {
    (key.raw, key.datatype)
}

fn literal_side(kg: &KnowledgeGraph, values: &BTreeSet<(String, Option<Iri>)>) -> (Vec<LiteralId>, Vec<TripleId>) {
    let ids: Vec<LiteralId> = kg
        .literal_ids()
        .filter(|&id| !kg.triples_with_literal(id).is_empty())
        .filter(|&id| values.contains(&identity(kg.literal(id).key())))
        .collect();
    let mut triples: Vec<TripleId> = ids.iter().flat_map(|&id| kg.triples_with_literal(id).iter().copied()).collect();
    triples.sort_unstable();
    (ids, triples)
}

pub fn common_literals(g1: &KnowledgeGraph, g2: &KnowledgeGraph) -> CommonLiteralSet {
    let used = |kg: &KnowledgeGraph| -> BTreeSet<(String, Option<Iri>)> {
        kg.literal_ids()
            .filter(|&id| !kg.triples_with_literal(id).is_empty())
            .map(|id| identity(kg.literal(id).key()))
            .collect()
    };
    let left = used(g1);
    let right = used(g2);
    let values: BTreeSet<_> = left.intersection(&right).cloned().collect();
    let (left_literals, left_triples) = literal_side(g1, &values);
    let (right_literals, right_triples) = literal_side(g2, &values);
    CommonLiteralSet { values, left_literals, right_literals, left_triples, right_triples }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::literal::XSD;
    use crate::model::{GraphBuilder, Term, Triple};

    fn graph(literals: &[(&str, Option<&str>)]) -> KnowledgeGraph {
        let mut b = GraphBuilder::default();
        let p = Iri::new("http://x/p").unwrap();
        for (i, (raw, dt)) in literals.iter().enumerate() {
            let dt = dt.map(|d| Iri::new(d).unwrap());
            b.insert(Triple::new(Iri::new(format!("http://x/s{i}")).unwrap(), p.clone(), Term::literal(raw, dt.as_ref())));
        }
        b.finish()
    }

    #[test]
    fn intersection_is_exact_and_symmetric() {
        let g1 = graph(&[("a", None), ("b", None)]);
        let g2 = graph(&[("b", None), ("c", None)]);
        let c = common_literals(&g1, &g2);
        assert_eq!(c.values.iter().map(|v| v.0.as_str()).collect::<Vec<_>>(), vec!["b"]);
        assert_eq!(c.left_triples.len(), 1);
        assert_eq!(c.right_triples.len(), 1);
        assert_eq!(common_literals(&g2, &g1).values, c.values);
    }

    #[test]
    fn disjoint_sets() {
        let c = common_literals(&graph(&[("a", None)]), &graph(&[("z", None)]));
        assert!(c.is_empty() && c.left_triples.is_empty() && c.right_triples.is_empty());
    }

    #[test]
    fn datatype_participates() {
        let int = format!("{XSD}int");
        let string = format!("{XSD}string");
        let c = common_literals(&graph(&[("5", Some(&int))]), &graph(&[("5", Some(&string))]));
        assert!(c.is_empty());
    }

    #[test]
    fn detect_source() {
        assert!(matches!(GraphSource::detect("http://localhost/sparql").unwrap(), GraphSource::Endpoint(_)));
        assert!(matches!(
            GraphSource::detect("a/b.ttl").unwrap(),
            GraphSource::File { format: RdfFormat::Turtle, .. }
        ));
        assert!(matches!(GraphSource::detect("a/b.rdf"), Err(IngestError::UnsupportedFormat(_))));
        let mut cfg = EndpointConfig::new("http://x");
        cfg.page_size = 0;
        assert!(GraphSource::Endpoint(cfg).validate().is_err());
    }
}
