use std::collections::BTreeMap;

use serde::Serialize;

use crate::label::{fuzzy_similarity, normalize_label};
use crate::model::{Iri, KnowledgeGraph, LiteralKind, ObjectRef};

pub const DEFAULT_CATEGORICAL_THRESHOLD: f64 = 0.05;
pub const DEFAULT_MIN_SUPPORT: u64 = 50;
/// Minimum fuzzy score for a free string to count as a category value.
pub const CATEGORY_FUZZY_MIN: f64 = 0.9;

/// Closed set of normalized values taken by a low-variety text predicate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoricalDomain {
    pub predicate: Iri,
    pub counts: BTreeMap<String, u64>,
}

impl CategoricalDomain {
    pub fn values(&self) -> impl Iterator<Item = &str> {
        self.counts.keys().map(String::as_str)
    }

    pub fn contains(&self, normalized: &str) -> bool {
        self.counts.contains_key(normalized)
    }

    /// Most similar domain value to `s` with its fuzzy score. Ties go to the
    /// lexicographically smallest value.
    pub fn closest(&self, s: &str) -> Option<(&str, f64)> {
        let norm = normalize_label(s);
        if let Some((k, _)) = self.counts.get_key_value(&norm) {
            return Some((k.as_str(), 1.0));
        }
        let mut best: Option<(&str, f64)> = None;
        for v in self.values() {
            let sim = fuzzy_similarity(&norm, v);
            if best.is_none_or(|(_, b)| sim > b) {
                best = Some((v, sim));
            }
        }
        best
    }
}

/// Text-only predicates with `unique_ratio <= threshold` and at least
/// `min_support` triples.
pub fn detect_categoricals(
    kg: &KnowledgeGraph,
    threshold: f64,
    min_support: u64,
) -> BTreeMap<Iri, CategoricalDomain> {
    let mut out = BTreeMap::new();
    for stats in kg.all_stats() {
        if stats.triple_count < min_support || stats.unique_ratio > threshold {
            continue;
        }
        let Some(pid) = kg.node_id(&stats.predicate) else { continue };
        let mut counts: BTreeMap<String, u64> = BTreeMap::new();
        let mut textual = true;
        for &tid in kg.triples_with_predicate(pid) {
            match kg.stored(tid).object {
                ObjectRef::Literal(l) if kg.literal(l).kind == LiteralKind::Text => {
                    *counts.entry(normalize_label(&kg.literal(l).raw)).or_default() += 1;
                }
                _ => {
                    textual = false;
                    break;
                }
            }
        }
        counts.remove("");
        if textual && counts.len() >= 2 {
            out.insert(stats.predicate.clone(), CategoricalDomain { predicate: stats.predicate.clone(), counts });
        }
    }
    out
}
