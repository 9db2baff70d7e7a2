//! Full Triple Matcher: aligns entities, predicates and whole triples
//! between two RDF knowledge graphs.
//!
//! The pipeline runs label matching first, then iterates exact-attribute,
//! inbound and outbound triple matching until the entity mappings stop
//! moving, and finally scores compatible and divergent triple pairs.

pub mod embedding;
pub mod eval;
pub mod ingestion;
pub mod label;
pub mod matcher;
pub mod model;
pub mod similarity;
mod par;

pub use model::{Iri, KnowledgeGraph, Term, Triple};
