use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use super::stats::{compute_all_stats, PredicateStats};
use super::{Iri, LiteralKey, LiteralValue, Term, Triple};
use super::{RDFS_LABEL, SKOS_ALT_LABEL, SKOS_PREF_LABEL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub struct NodeId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub struct LiteralId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub struct TripleId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ObjectRef {
    Entity(NodeId),
    Literal(LiteralId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StoredTriple {
    pub subject: NodeId,
    pub predicate: NodeId,
    pub object: ObjectRef,
}

pub fn default_label_predicates() -> Vec<Iri> {
    [RDFS_LABEL, SKOS_ALT_LABEL, SKOS_PREF_LABEL]
        .iter()
        .map(|s| Iri::new(s).expect("static IRI"))
        .collect()
}

/// Single-writer builder. Triples are deduplicated on insert.
#[derive(Debug)]
pub struct GraphBuilder {
    iris: Vec<Iri>,
    iri_ids: HashMap<Iri, NodeId>,
    literals: Vec<LiteralValue>,
    literal_ids: HashMap<LiteralKey, LiteralId>,
    triples: Vec<StoredTriple>,
    seen: HashSet<StoredTriple>,
    label_predicates: HashSet<NodeId>,
    labels: HashMap<NodeId, BTreeSet<String>>,
}

impl Default for GraphBuilder {
    fn default() -> Self {
        Self::new(&default_label_predicates())
    }
}

impl GraphBuilder {
    pub fn new(label_predicates: &[Iri]) -> Self {
        let mut builder = Self {
            iris: Vec::new(),
            iri_ids: HashMap::new(),
            literals: Vec::new(),
            literal_ids: HashMap::new(),
            triples: Vec::new(),
            seen: HashSet::new(),
            label_predicates: HashSet::new(),
            labels: HashMap::new(),
        };
        for p in label_predicates {
            let id = builder.intern_iri(p);
            builder.label_predicates.insert(id);
        }
        builder
    }

    pub fn intern_iri(&mut self, iri: &Iri) -> NodeId {
        if let Some(id) = self.iri_ids.get(iri) {
            return *id;
        }
        let id = NodeId(self.iris.len() as u32);
        self.iris.push(iri.clone());
        self.iri_ids.insert(iri.clone(), id);
        id
    }

    pub fn intern_literal(&mut self, value: LiteralValue) -> LiteralId {
        let key = value.key();
        if let Some(id) = self.literal_ids.get(&key) {
            return *id;
        }
        let id = LiteralId(self.literals.len() as u32);
        self.literals.push(value);
        self.literal_ids.insert(key, id);
        id
    }

    /// Returns false when the triple was already present.
    pub fn insert(&mut self, triple: Triple) -> bool {
        let subject = self.intern_iri(&triple.subject);
        let predicate = self.intern_iri(&triple.predicate);
        let object = match triple.object {
            Term::Entity(iri) => ObjectRef::Entity(self.intern_iri(&iri)),
            Term::Literal(lit) => ObjectRef::Literal(self.intern_literal(lit)),
        };
        self.insert_ids(StoredTriple { subject, predicate, object })
    }

    pub(crate) fn insert_ids(&mut self, triple: StoredTriple) -> bool {
        if !self.seen.insert(triple) {
            return false;
        }
        if self.label_predicates.contains(&triple.predicate) {
            if let ObjectRef::Literal(lid) = triple.object {
                let label = self.literals[lid.0 as usize].raw.trim().to_string();
                if !label.is_empty() {
                    self.labels.entry(triple.subject).or_default().insert(label);
                }
            }
        }
        self.triples.push(triple);
        true
    }

    pub fn add_label(&mut self, node: &Iri, label: &str) {
        let id = self.intern_iri(node);
        let label = label.trim();
        if !label.is_empty() {
            self.labels.entry(id).or_default().insert(label.to_string());
        }
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// Freezes the graph: builds indexes, adds IRI-derived fallback labels
    /// for nodes without an explicit one and computes predicate statistics.
    pub fn finish(self) -> KnowledgeGraph {
        let GraphBuilder { iris, literals, triples, mut labels, .. } = self;
        let mut used = vec![false; iris.len()];
        for t in &triples {
            used[t.subject.0 as usize] = true;
            used[t.predicate.0 as usize] = true;
            if let ObjectRef::Entity(o) = t.object {
                used[o.0 as usize] = true;
            }
        }
        for (idx, iri) in iris.iter().enumerate() {
            let id = NodeId(idx as u32);
            if used[idx] && !labels.contains_key(&id) {
                let fallback = iri.local_name();
                if !fallback.is_empty() {
                    labels.entry(id).or_default().insert(fallback);
                }
            }
        }
        let mut label_table = vec![Vec::new(); iris.len()];
        for (id, set) in labels {
            label_table[id.0 as usize] = set.into_iter().collect();
        }
        KnowledgeGraph::assemble(iris, literals, triples, label_table, None)
    }
}

/// Indexed, immutable triple store over interned IRIs and literals.
#[derive(Debug, Clone)]
pub struct KnowledgeGraph {
    iris: Vec<Iri>,
    iri_ids: HashMap<Iri, NodeId>,
    literals: Vec<LiteralValue>,
    literal_ids: HashMap<LiteralKey, LiteralId>,
    triples: Vec<StoredTriple>,
    by_subject: Vec<Vec<TripleId>>,
    by_object: Vec<Vec<TripleId>>,
    by_predicate: Vec<Vec<TripleId>>,
    by_literal: Vec<Vec<TripleId>>,
    labels: Vec<Vec<String>>,
    stats: BTreeMap<NodeId, PredicateStats>,
    entities: Vec<NodeId>,
    predicates: Vec<NodeId>,
}

impl Default for KnowledgeGraph {
    fn default() -> Self {
        GraphBuilder::default().finish()
    }
}

impl KnowledgeGraph {
    pub(crate) fn assemble(
        iris: Vec<Iri>,
        literals: Vec<LiteralValue>,
        triples: Vec<StoredTriple>,
        labels: Vec<Vec<String>>,
        stats: Option<BTreeMap<NodeId, PredicateStats>>,
    ) -> Self {
        let iri_ids = iris.iter().enumerate().map(|(i, iri)| (iri.clone(), NodeId(i as u32))).collect();
        let literal_ids =
            literals.iter().enumerate().map(|(i, l)| (l.key(), LiteralId(i as u32))).collect();
        let mut by_subject = vec![Vec::new(); iris.len()];
        let mut by_object = vec![Vec::new(); iris.len()];
        let mut by_predicate = vec![Vec::new(); iris.len()];
        let mut by_literal = vec![Vec::new(); literals.len()];
        let mut is_entity = vec![false; iris.len()];
        for (idx, t) in triples.iter().enumerate() {
            let tid = TripleId(idx as u32);
            by_subject[t.subject.0 as usize].push(tid);
            by_predicate[t.predicate.0 as usize].push(tid);
            is_entity[t.subject.0 as usize] = true;
            match t.object {
                ObjectRef::Entity(o) => {
                    by_object[o.0 as usize].push(tid);
                    is_entity[o.0 as usize] = true;
                }
                ObjectRef::Literal(l) => by_literal[l.0 as usize].push(tid),
            }
        }
        let entities = (0..iris.len()).filter(|&i| is_entity[i]).map(|i| NodeId(i as u32)).collect();
        let predicates: Vec<NodeId> = (0..iris.len())
            .filter(|&i| !by_predicate[i].is_empty())
            .map(|i| NodeId(i as u32))
            .collect();
        let mut graph = Self {
            iris,
            iri_ids,
            literals,
            literal_ids,
            triples,
            by_subject,
            by_object,
            by_predicate,
            by_literal,
            labels,
            stats: BTreeMap::new(),
            entities,
            predicates,
        };
        graph.stats = stats.unwrap_or_else(|| compute_all_stats(&graph));
        graph
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn iri(&self, id: NodeId) -> &Iri {
        &self.iris[id.0 as usize]
    }

    pub fn node_id(&self, iri: &Iri) -> Option<NodeId> {
        self.iri_ids.get(iri).copied()
    }

    pub fn node_id_str(&self, iri: &str) -> Option<NodeId> {
        Iri::new(iri).ok().and_then(|i| self.node_id(&i))
    }

    pub fn literal(&self, id: LiteralId) -> &LiteralValue {
        &self.literals[id.0 as usize]
    }

    pub fn literal_id(&self, key: &LiteralKey) -> Option<LiteralId> {
        self.literal_ids.get(key).copied()
    }

    pub fn literal_count(&self) -> usize {
        self.literals.len()
    }

    pub fn literal_ids(&self) -> impl Iterator<Item = LiteralId> + '_ {
        (0..self.literals.len()).map(|i| LiteralId(i as u32))
    }

    pub fn node_count(&self) -> usize {
        self.iris.len()
    }

    pub fn stored(&self, id: TripleId) -> &StoredTriple {
        &self.triples[id.0 as usize]
    }

    pub fn stored_triples(&self) -> &[StoredTriple] {
        &self.triples
    }

    pub fn triple_ids(&self) -> impl Iterator<Item = TripleId> + '_ {
        (0..self.triples.len()).map(|i| TripleId(i as u32))
    }

    /// Materializes an owned triple.
    pub fn triple(&self, id: TripleId) -> Triple {
        let t = self.stored(id);
        Triple {
            subject: self.iri(t.subject).clone(),
            predicate: self.iri(t.predicate).clone(),
            object: self.object_term(t.object),
        }
    }

    pub fn object_term(&self, object: ObjectRef) -> Term {
        match object {
            ObjectRef::Entity(id) => Term::Entity(self.iri(id).clone()),
            ObjectRef::Literal(id) => Term::Literal(self.literal(id).clone()),
        }
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        let (Some(s), Some(p)) = (self.node_id(&triple.subject), self.node_id(&triple.predicate)) else {
            return false;
        };
        let o = match &triple.object {
            Term::Entity(iri) => match self.node_id(iri) {
                Some(o) => ObjectRef::Entity(o),
                None => return false,
            },
            Term::Literal(l) => match self.literal_id(&l.key()) {
                Some(o) => ObjectRef::Literal(o),
                None => return false,
            },
        };
        let needle = StoredTriple { subject: s, predicate: p, object: o };
        self.by_subject[s.0 as usize].iter().any(|t| *self.stored(*t) == needle)
    }

    pub fn triples_with_subject(&self, id: NodeId) -> &[TripleId] {
        &self.by_subject[id.0 as usize]
    }

    pub fn triples_with_object(&self, id: NodeId) -> &[TripleId] {
        &self.by_object[id.0 as usize]
    }

    pub fn triples_with_predicate(&self, id: NodeId) -> &[TripleId] {
        &self.by_predicate[id.0 as usize]
    }

    pub fn triples_with_literal(&self, id: LiteralId) -> &[TripleId] {
        &self.by_literal[id.0 as usize]
    }

    pub fn labels(&self, id: NodeId) -> &[String] {
        &self.labels[id.0 as usize]
    }

    pub fn label_table(&self) -> &[Vec<String>] {
        &self.labels
    }

    pub fn iris(&self) -> &[Iri] {
        &self.iris
    }

    pub fn literals(&self) -> &[LiteralValue] {
        &self.literals
    }

    /// Nodes occurring as a subject or as an entity object.
    pub fn entities(&self) -> &[NodeId] {
        &self.entities
    }

    pub fn predicates(&self) -> &[NodeId] {
        &self.predicates
    }

    pub fn stats(&self, predicate: NodeId) -> Option<&PredicateStats> {
        self.stats.get(&predicate)
    }

    pub fn all_stats(&self) -> impl Iterator<Item = &PredicateStats> {
        self.stats.values()
    }

    pub fn functionality(&self, predicate: NodeId) -> f64 {
        self.stats.get(&predicate).map_or(0.0, |s| s.functionality)
    }

    pub fn inverse_functionality(&self, predicate: NodeId) -> f64 {
        self.stats.get(&predicate).map_or(0.0, |s| s.inverse_functionality)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str, p: &str, o: Term) -> Triple {
        Triple::new(Iri::new(s).unwrap(), Iri::new(p).unwrap(), o)
    }

    #[test]
    fn duplicate_triples_stored_once() {
        let mut b = GraphBuilder::default();
        assert!(b.insert(t("http://x/a", "http://x/p", Term::entity("http://x/x").unwrap())));
        assert!(!b.insert(t("http://x/a", "http://x/p", Term::entity("http://x/x").unwrap())));
        let g = b.finish();
        assert_eq!(g.len(), 1);
        let p = g.node_id_str("http://x/p").unwrap();
        assert_eq!(g.stats(p).unwrap().triple_count, 1);
    }

    #[test]
    fn indexes_follow_fields() {
        let mut b = GraphBuilder::default();
        b.insert(t("http://x/a", "http://x/p", Term::entity("http://x/b").unwrap()));
        b.insert(t("http://x/a", "http://x/q", Term::literal("red", None)));
        let g = b.finish();
        let a = g.node_id_str("http://x/a").unwrap();
        let bb = g.node_id_str("http://x/b").unwrap();
        assert_eq!(g.triples_with_subject(a).len(), 2);
        assert_eq!(g.triples_with_object(bb).len(), 1);
        assert_eq!(g.triples_with_object(a).len(), 0);
        let lid = g.literal_id(&LiteralValue::text("red").key()).unwrap();
        assert_eq!(g.triples_with_literal(lid).len(), 1);
        assert_eq!(g.entities().len(), 2);
        assert_eq!(g.predicates().len(), 2);
    }

    #[test]
    fn explicit_labels_suppress_fallback() {
        let mut b = GraphBuilder::default();
        b.insert(t("http://x/Some_Thing", RDFS_LABEL, Term::literal("Thing label", None)));
        b.insert(t("http://x/Some_Thing", "http://x/rel", Term::entity("http://x/Other_One").unwrap()));
        let g = b.finish();
        let s = g.node_id_str("http://x/Some_Thing").unwrap();
        let o = g.node_id_str("http://x/Other_One").unwrap();
        assert_eq!(g.labels(s), ["Thing label".to_string()]);
        assert_eq!(g.labels(o), ["Other One".to_string()]);
    }
}
