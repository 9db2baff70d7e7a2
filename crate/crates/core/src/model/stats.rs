use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use super::graph::{KnowledgeGraph, NodeId};
use super::{Iri, ModelError};

/// Per-predicate cardinality statistics.
///
/// `functionality` is distinct subjects over triples, `inverse_functionality`
/// distinct objects over triples. `unique_ratio` counts objects by value
/// (literals by lexical form, datatype and language tag) and therefore
/// coincides with the inverse functionality on a deduplicated graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredicateStats {
    pub predicate: Iri,
    pub triple_count: u64,
    pub distinct_subjects: u64,
    pub distinct_objects: u64,
    pub functionality: f64,
    pub inverse_functionality: f64,
    pub unique_ratio: f64,
}

impl PredicateStats {
    pub fn from_counts(predicate: Iri, triple_count: u64, distinct_subjects: u64, distinct_objects: u64) -> Self {
        let ratio = |n: u64| if triple_count == 0 { 0.0 } else { n as f64 / triple_count as f64 };
        Self {
            predicate,
            triple_count,
            distinct_subjects,
            distinct_objects,
            functionality: ratio(distinct_subjects),
            inverse_functionality: ratio(distinct_objects),
            unique_ratio: ratio(distinct_objects),
        }
    }
}

pub(crate) fn compute_all_stats(kg: &KnowledgeGraph) -> BTreeMap<NodeId, PredicateStats> {
    kg.predicates()
        .iter()
        .map(|&p| {
            let ids = kg.triples_with_predicate(p);
            let mut subjects = HashSet::with_capacity(ids.len());
            let mut objects = HashSet::with_capacity(ids.len());
            for &tid in ids {
                let t = kg.stored(tid);
                subjects.insert(t.subject);
                objects.insert(t.object);
            }
            let stats = PredicateStats::from_counts(
                kg.iri(p).clone(),
                ids.len() as u64,
                subjects.len() as u64,
                objects.len() as u64,
            );
            (p, stats)
        })
        .collect()
}

fn lookup<'a>(kg: &'a KnowledgeGraph, p: &Iri) -> Result<&'a PredicateStats, ModelError> {
    kg.node_id(p)
        .and_then(|id| kg.stats(id))
        .ok_or_else(|| ModelError::PredicateAbsent(p.to_string()))
}

/// Distinct subjects over triple count for `p`.
pub fn compute_functionality(kg: &KnowledgeGraph, p: &Iri) -> Result<f64, ModelError> {
    lookup(kg, p).map(|s| s.functionality)
}

/// Functionality of the inverted predicate: distinct objects over triples.
pub fn compute_inverse_functionality(kg: &KnowledgeGraph, p: &Iri) -> Result<f64, ModelError> {
    lookup(kg, p).map(|s| s.inverse_functionality)
}

pub fn compute_unique_ratio(kg: &KnowledgeGraph, p: &Iri) -> Result<f64, ModelError> {
    lookup(kg, p).map(|s| s.unique_ratio)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{GraphBuilder, Term, Triple};

    const P: &str = "http://x/p";

    fn graph(rows: &[(&str, Term)]) -> KnowledgeGraph {
        let mut b = GraphBuilder::default();
        for (s, o) in rows {
            b.insert(Triple::new(
                Iri::new(format!("http://x/{s}")).unwrap(),
                Iri::new(P).unwrap(),
                o.clone(),
            ));
        }
        b.finish()
    }

    fn e(name: &str) -> Term {
        Term::entity(&format!("http://x/{name}")).unwrap()
    }

    fn p() -> Iri {
        Iri::new(P).unwrap()
    }

    #[test]
    fn functionality_examples() {
        let g = graph(&[("a", e("x")), ("b", e("y"))]);
        assert_eq!(compute_functionality(&g, &p()).unwrap(), 1.0);
        let g = graph(&[("a", e("x")), ("a", e("y")), ("b", e("z"))]);
        assert!((compute_functionality(&g, &p()).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        let g = graph(&[("a", e("x")), ("a", e("x"))]);
        assert_eq!(compute_functionality(&g, &p()).unwrap(), 1.0);
    }

    #[test]
    fn inverse_functionality_examples() {
        let g = graph(&[("a", e("x")), ("b", e("x"))]);
        assert_eq!(compute_inverse_functionality(&g, &p()).unwrap(), 0.5);
        let g = graph(&[("a", e("x")), ("b", e("y"))]);
        assert_eq!(compute_inverse_functionality(&g, &p()).unwrap(), 1.0);
        let int = Iri::new("http://www.w3.org/2001/XMLSchema#integer").unwrap();
        let float = Iri::new("http://www.w3.org/2001/XMLSchema#float").unwrap();
        let g = graph(&[("a", Term::literal("5", Some(&int))), ("b", Term::literal("5", Some(&float)))]);
        assert_eq!(compute_inverse_functionality(&g, &p()).unwrap(), 1.0);
    }

    #[test]
    fn unique_ratio_examples() {
        let g = graph(&[
            ("a", Term::literal("red", None)),
            ("b", Term::literal("red", None)),
            ("c", Term::literal("blue", None)),
        ]);
        assert!((compute_unique_ratio(&g, &p()).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        let g = graph(&[("a", Term::literal("red", None))]);
        assert_eq!(compute_unique_ratio(&g, &p()).unwrap(), 1.0);
        let g = graph(&[("a", e("x")), ("b", e("x")), ("c", e("x")), ("d", e("x"))]);
        assert_eq!(compute_unique_ratio(&g, &p()).unwrap(), 0.25);
    }

    #[test]
    fn unknown_predicate_is_an_error() {
        let g = graph(&[("a", e("x"))]);
        let other = Iri::new("http://x/other").unwrap();
        assert_eq!(
            compute_functionality(&g, &other),
            Err(ModelError::PredicateAbsent("http://x/other".into()))
        );
        assert!(compute_inverse_functionality(&g, &other).is_err());
        assert!(compute_unique_ratio(&g, &other).is_err());
    }
}
