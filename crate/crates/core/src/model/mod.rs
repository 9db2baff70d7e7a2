//! Core domain types: IRIs, terms, triples, the indexed knowledge graph and
//! per-predicate statistics.

mod graph;
pub mod literal;
mod stats;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use graph::{default_label_predicates, GraphBuilder, KnowledgeGraph, LiteralId, NodeId, ObjectRef, StoredTriple, TripleId};
pub use literal::{classify_literal, LiteralKey, LiteralKind, LiteralValue};
pub use stats::{
    compute_functionality, compute_inverse_functionality, compute_unique_ratio, PredicateStats,
};

pub const RDFS_LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";
pub const SKOS_ALT_LABEL: &str = "http://www.w3.org/2004/02/skos/core#altLabel";
pub const SKOS_PREF_LABEL: &str = "http://www.w3.org/2004/02/skos/core#prefLabel";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid IRI {0:?}: must be non-empty and contain no whitespace")]
    InvalidIri(String),
    #[error("predicate absent: {0}")]
    PredicateAbsent(String),
}

/// An IRI (or opaque blank-node identifier). Equality is exact byte
/// equality; no normalization is applied.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Iri(Arc<str>);

impl Iri {
    pub fn new(value: impl AsRef<str>) -> Result<Self, ModelError> {
        let value = value.as_ref();
        if value.is_empty() || value.chars().any(char::is_whitespace) {
            return Err(ModelError::InvalidIri(value.to_string()));
        }
        Ok(Self(Arc::from(value)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The last path or fragment segment, percent-decoded, with
    /// underscores turned into spaces. Used as a fallback label.
    pub fn local_name(&self) -> String {
        let s = self.as_str().trim_end_matches(['/', '#']);
        let tail = s.rsplit(['/', '#']).next().unwrap_or(s);
        let tail = tail.strip_prefix("_:").unwrap_or(tail);
        let decoded = percent_encoding::percent_decode_str(tail).decode_utf8_lossy();
        decoded.replace('_', " ").trim().to_string()
    }
}

impl TryFrom<String> for Iri {
    type Error = ModelError;
    fn try_from(value: String) -> Result<Self, Self::Error> {
        Iri::new(value)
    }
}

impl From<Iri> for String {
    fn from(value: Iri) -> Self {
        value.0.to_string()
    }
}

impl fmt::Debug for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0)
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Term {
    Entity(Iri),
    Literal(LiteralValue),
}

impl Term {
    pub fn entity(iri: &str) -> Result<Self, ModelError> {
        Iri::new(iri).map(Term::Entity)
    }

    /// A literal classified from its lexical form and optional datatype.
    pub fn literal(raw: &str, datatype: Option<&Iri>) -> Self {
        Term::Literal(classify_literal(raw, datatype))
    }

    pub fn as_entity(&self) -> Option<&Iri> {
        match self {
            Term::Entity(iri) => Some(iri),
            Term::Literal(_) => None,
        }
    }

    pub fn as_literal(&self) -> Option<&LiteralValue> {
        match self {
            Term::Literal(l) => Some(l),
            Term::Entity(_) => None,
        }
    }

    /// N-Triples serialization of the term.
    pub fn to_ntriples(&self) -> String {
        match self {
            Term::Entity(iri) => format_iri(iri),
            Term::Literal(l) => {
                let mut out = String::with_capacity(l.raw.len() + 2);
                out.push('"');
                escape_ntriples_into(&l.raw, &mut out);
                out.push('"');
                if let Some(lang) = &l.language_tag {
                    out.push('@');
                    out.push_str(lang);
                } else if let Some(dt) = &l.datatype_iri {
                    out.push_str("^^");
                    out.push_str(&format_iri(dt));
                }
                out
            }
        }
    }
}

fn format_iri(iri: &Iri) -> String {
    if iri.as_str().starts_with("_:") {
        iri.to_string()
    } else {
        format!("<{iri}>")
    }
}

pub fn escape_ntriples_into(raw: &str, out: &mut String) {
    for c in raw.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04X}", c as u32)),
            c => out.push(c),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Triple {
    pub subject: Iri,
    pub predicate: Iri,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: Iri, predicate: Iri, object: Term) -> Self {
        Self { subject, predicate, object }
    }

    pub fn to_ntriples(&self) -> String {
        format!(
            "{} {} {} .",
            format_iri(&self.subject),
            format_iri(&self.predicate),
            self.object.to_ntriples()
        )
    }
}
