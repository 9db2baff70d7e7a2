//! The matching engine: exact-attribute, inbound and outbound phases, the
//! fixed-point loop over entity scores, and post-hoc divergence scoring.

mod formulas;
mod output;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::embedding::{label_cosine, EmbeddingProvider, EmbeddingVector};
use crate::ingestion::CommonLiteralSet;
use crate::label::{fuzzy_similarity, normalize_label, LabelMapping};
use crate::model::{Iri, KnowledgeGraph, LiteralId, NodeId, ObjectRef, TripleId};
use crate::par;
use crate::similarity::{
    detect_categoricals, object_similarity, CategoricalDomain, Object, DEFAULT_CATEGORICAL_THRESHOLD,
    DEFAULT_ENTITY_SIMILARITY, DEFAULT_MIN_SUPPORT,
};

pub use formulas::{
    combine_entity_similarity, entity_similarity_from_triples, triple_divergence, triple_similarity, FormulaError,
    TripleFactors,
};
pub use output::{
    read_entity_mappings, write_entity_mappings, write_triple_mappings, EntityMappingRecord, OutputError,
    ENTITY_TSV_HEADER, TRIPLE_TSV_HEADER,
};

pub type PairKey = (NodeId, NodeId);
pub type TriplePairKey = (TripleId, TripleId);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    ExactAttribute,
    Inbound,
    Outbound,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::ExactAttribute => "exact_attribute",
            Phase::Inbound => "inbound",
            Phase::Outbound => "outbound",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Compatible,
    Divergent,
    Undecided,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Compatible => "compatible",
            Classification::Divergent => "divergent",
            Classification::Undecided => "undecided",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    pub entity: f64,
    pub compatible: f64,
    pub divergent: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { entity: 0.90, compatible: 0.60, divergent: 0.25 }
    }
}

impl Thresholds {
    pub fn classify(&self, compat: f64, divergence: Option<f64>) -> Classification {
        if compat >= self.compatible {
            Classification::Compatible
        } else if divergence.is_some_and(|d| d >= self.divergent) {
            Classification::Divergent
        } else {
            Classification::Undecided
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchConfig {
    pub k_top: usize,
    pub max_iterations: usize,
    pub common_literal_cap: usize,
    /// Continue while the matched-source count grows by more than this.
    pub growth_threshold: f64,
    /// Continue while more than this fraction of sources change top-1.
    pub shift_threshold: f64,
    pub thresholds: Thresholds,
    pub categorical_threshold: f64,
    pub categorical_min_support: u64,
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self {
            k_top: 10,
            max_iterations: 10,
            common_literal_cap: 1000,
            growth_threshold: 0.10,
            shift_threshold: 0.10,
            thresholds: Thresholds::default(),
            categorical_threshold: DEFAULT_CATEGORICAL_THRESHOLD,
            categorical_min_support: DEFAULT_MIN_SUPPORT,
        }
    }
}

/// Predicate-pair confidences, fixed after label matching.
#[derive(Debug, Clone, Default)]
pub struct PredicateTable {
    pairs: HashMap<PairKey, f64>,
}

impl PredicateTable {
    pub fn from_mappings(g1: &KnowledgeGraph, g2: &KnowledgeGraph, mappings: &[LabelMapping]) -> Self {
        let pairs = mappings
            .iter()
            .filter_map(|m| Some(((g1.node_id(&m.left)?, g2.node_id(&m.right)?), m.confidence)))
            .collect();
        Self { pairs }
    }

    pub fn get(&self, p1: NodeId, p2: NodeId) -> Option<f64> {
        self.pairs.get(&(p1, p2)).copied()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Read-only inputs shared by every phase.
pub struct MatchContext<'a> {
    pub g1: &'a KnowledgeGraph,
    pub g2: &'a KnowledgeGraph,
    pub predicates: PredicateTable,
    pub categoricals1: HashMap<NodeId, CategoricalDomain>,
    pub categoricals2: HashMap<NodeId, CategoricalDomain>,
    pub config: MatchConfig,
}

impl<'a> MatchContext<'a> {
    pub fn new(
        g1: &'a KnowledgeGraph,
        g2: &'a KnowledgeGraph,
        predicate_mappings: &[LabelMapping],
        config: MatchConfig,
    ) -> Self {
        let domains = |kg: &KnowledgeGraph| -> HashMap<NodeId, CategoricalDomain> {
            detect_categoricals(kg, config.categorical_threshold, config.categorical_min_support)
                .into_iter()
                .filter_map(|(iri, d)| Some((kg.node_id(&iri)?, d)))
                .collect()
        };
        Self {
            g1,
            g2,
            predicates: PredicateTable::from_mappings(g1, g2, predicate_mappings),
            categoricals1: domains(g1),
            categoricals2: domains(g2),
            config,
        }
    }

    fn factors(&self, t1: TripleId, t2: TripleId, ent: f64, obj: f64) -> Option<TripleFactors> {
        let a = self.g1.stored(t1);
        let b = self.g2.stored(t2);
        let pred = self.predicates.get(a.predicate, b.predicate)?;
        Some(TripleFactors {
            ent,
            pred,
            fun1: self.g1.functionality(a.predicate),
            fun2: self.g2.functionality(b.predicate),
            inv1: self.g1.inverse_functionality(a.predicate),
            inv2: self.g2.inverse_functionality(b.predicate),
            obj,
        })
    }

    fn object<'s>(&'s self, left: bool, t: TripleId) -> Object<'s> {
        let (kg, domains) = if left { (self.g1, &self.categoricals1) } else { (self.g2, &self.categoricals2) };
        let st = kg.stored(t);
        match st.object {
            ObjectRef::Entity(id) => Object::Entity { id, labels: kg.labels(id) },
            ObjectRef::Literal(l) => Object::from_literal(kg.literal(l), domains.get(&st.predicate)),
        }
    }

    /// Object similarity of the objects of `t1` (left graph) and `t2`.
    pub fn object_similarity(&self, state: &MatchState, t1: TripleId, t2: TripleId) -> f64 {
        let scores = |l: NodeId, r: NodeId| state.entities.get(&(l, r)).map(|e| e.combined);
        object_similarity(&self.object(true, t1), &self.object(false, t2), &scores)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntityScore {
    pub label: Option<f64>,
    pub triple: Option<f64>,
    pub combined: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TripleScore {
    pub compat: f64,
    pub phase: Phase,
    pub iteration: usize,
}

/// A scored triple pair, left graph first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TripleMapping {
    pub left: TripleId,
    pub right: TripleId,
    pub compat: f64,
    pub divergence: Option<f64>,
    pub phase: Phase,
    pub iteration: usize,
    pub classification: Classification,
}

/// An entity pair with IRIs resolved.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntityMapping {
    pub left: Iri,
    pub right: Iri,
    pub label_confidence: Option<f64>,
    pub triple_confidence: Option<f64>,
    pub combined: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub exact_attribute_pairs: usize,
    pub inbound_pairs: usize,
    pub outbound_pairs: usize,
    pub triple_mappings: usize,
    pub entity_pairs: usize,
    pub matched_sources: usize,
    pub previous_matched_sources: usize,
    pub top1_changed_fraction: f64,
    #[serde(skip)]
    pub top_pairs: Vec<PairKey>,
}

#[derive(Debug, Clone, Default)]
pub struct MatchState {
    /// Label confidence per entity pair.
    pub label: BTreeMap<PairKey, f64>,
    /// Triple-based confidence per entity pair, rebuilt every iteration.
    pub entity_triple: BTreeMap<PairKey, f64>,
    /// Current combined entity scores.
    pub entities: BTreeMap<PairKey, EntityScore>,
    /// Triple mappings accumulated across iterations.
    pub triples: BTreeMap<TriplePairKey, TripleScore>,
    pub iteration: usize,
    pub history: Vec<IterationRecord>,
    pub stop_reason: Option<StopReason>,
    pub warnings: Vec<String>,
}

impl MatchState {
    pub fn new(ctx: &MatchContext<'_>, entity_label_mappings: &[LabelMapping]) -> Self {
        let mut label = BTreeMap::new();
        for m in entity_label_mappings {
            if let (Some(l), Some(r)) = (ctx.g1.node_id(&m.left), ctx.g2.node_id(&m.right)) {
                let slot = label.entry((l, r)).or_insert(m.confidence);
                *slot = slot.max(m.confidence);
            }
        }
        let entities = label
            .iter()
            .map(|(&k, &c)| (k, EntityScore { label: Some(c), triple: None, combined: 0.5 * c }))
            .collect();
        Self { label, entities, ..Default::default() }
    }

    /// Entity scores taken as given, e.g. read back from a mappings file.
    pub fn from_entity_scores(entities: BTreeMap<PairKey, EntityScore>) -> Self {
        Self { entities, ..Default::default() }
    }

    /// Current combined score, or the neutral default for unscored pairs.
    pub fn entity_score(&self, left: NodeId, right: NodeId) -> f64 {
        self.entities.get(&(left, right)).map_or(DEFAULT_ENTITY_SIMILARITY, |e| e.combined)
    }

    /// Targets per source ordered by score, ties broken by target IRI.
    pub fn ranked_targets(&self, g2: &KnowledgeGraph) -> BTreeMap<NodeId, Vec<(NodeId, f64)>> {
        let mut out: BTreeMap<NodeId, Vec<(NodeId, f64)>> = BTreeMap::new();
        for (&(l, r), s) in &self.entities {
            out.entry(l).or_default().push((r, s.combined));
        }
        for list in out.values_mut() {
            list.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| g2.iri(a.0).cmp(g2.iri(b.0))));
        }
        out
    }

    pub fn top1(&self, g2: &KnowledgeGraph) -> BTreeMap<NodeId, NodeId> {
        self.ranked_targets(g2).into_iter().filter_map(|(l, v)| Some((l, v.first()?.0))).collect()
    }

    pub fn matched_sources(&self) -> usize {
        let mut last = None;
        let mut n = 0;
        for &(l, _) in self.entities.keys() {
            if last != Some(l) {
                n += 1;
                last = Some(l);
            }
        }
        n
    }

    pub fn entity_mappings(&self, g1: &KnowledgeGraph, g2: &KnowledgeGraph) -> Vec<EntityMapping> {
        let mut out: Vec<EntityMapping> = self
            .entities
            .iter()
            .map(|(&(l, r), s)| EntityMapping {
                left: g1.iri(l).clone(),
                right: g2.iri(r).clone(),
                label_confidence: s.label,
                triple_confidence: s.triple,
                combined: s.combined,
            })
            .collect();
        out.sort_by(|a, b| (&a.left, &a.right).cmp(&(&b.left, &b.right)));
        out
    }

    /// Accumulated triple mappings, classified on compatibility alone.
    pub fn triple_mappings(&self, thresholds: &Thresholds) -> Vec<TripleMapping> {
        self.triples
            .iter()
            .map(|(&(left, right), s)| TripleMapping {
                left,
                right,
                compat: s.compat,
                divergence: None,
                phase: s.phase,
                iteration: s.iteration,
                classification: thresholds.classify(s.compat, None),
            })
            .collect()
    }
}

/// Top-k targets per source; every target tied with the k-th is kept.
pub fn top_k_pairs(state: &MatchState, g2: &KnowledgeGraph, k: usize) -> Vec<(NodeId, NodeId, f64)> {
    let mut out = Vec::new();
    for (l, list) in state.ranked_targets(g2) {
        if k == 0 || list.is_empty() {
            continue;
        }
        let cutoff = list[(k - 1).min(list.len() - 1)].1;
        for (i, &(r, s)) in list.iter().enumerate() {
            if i < k || s == cutoff {
                out.push((l, r, s));
            } else {
                break;
            }
        }
    }
    out
}

pub type PhaseOutput = Vec<(TriplePairKey, f64)>;

/// Pairs of triples whose literal objects are identical, scored with an
/// object similarity of 1.
pub fn exact_attribute_phase(ctx: &MatchContext<'_>, state: &MatchState, common: &CommonLiteralSet) -> PhaseOutput {
    let group = |kg: &KnowledgeGraph, ids: &[LiteralId]| {
        let mut map: BTreeMap<(String, Option<Iri>), Vec<TripleId>> = BTreeMap::new();
        for &id in ids {
            let key = kg.literal(id).key();
            map.entry((key.raw, key.datatype)).or_default().extend_from_slice(kg.triples_with_literal(id));
        }
        map
    };
    let left = group(ctx.g1, &common.left_literals);
    let right = group(ctx.g2, &common.right_literals);
    let cap = ctx.config.common_literal_cap;
    let groups: Vec<(&Vec<TripleId>, &Vec<TripleId>)> = left
        .iter()
        .filter_map(|(k, l)| Some((l, right.get(k)?)))
        .filter(|(l, r)| {
            let keep = l.len() <= cap && r.len() <= cap;
            if !keep {
                log::debug!("skipping literal shared by {} / {} triples", l.len(), r.len());
            }
            keep
        })
        .collect();
    par::map(&groups, |(l, r)| {
        let mut out = Vec::new();
        for &t1 in l.iter() {
            let s1 = ctx.g1.stored(t1).subject;
            for &t2 in r.iter() {
                let s2 = ctx.g2.stored(t2).subject;
                if let Some(f) = ctx.factors(t1, t2, state.entity_score(s1, s2), 1.0) {
                    out.push(((t1, t2), f.similarity()));
                }
            }
        }
        out
    })
    .into_iter()
    .flatten()
    .collect()
}

/// Triples in which a top-k pair appears as the object, scored with the
/// subjects' similarity as entity term and the pair's score as object term.
pub fn inbound_phase(ctx: &MatchContext<'_>, state: &MatchState, k: usize) -> PhaseOutput {
    let pairs = top_k_pairs(state, ctx.g2, k);
    par::map(&pairs, |&(e1, e2, score)| {
        let mut out = Vec::new();
        for &t1 in ctx.g1.triples_with_object(e1) {
            let s1 = ctx.g1.stored(t1).subject;
            for &t2 in ctx.g2.triples_with_object(e2) {
                let s2 = ctx.g2.stored(t2).subject;
                if let Some(f) = ctx.factors(t1, t2, state.entity_score(s1, s2), score) {
                    out.push(((t1, t2), f.similarity()));
                }
            }
        }
        out
    })
    .into_iter()
    .flatten()
    .collect()
}

/// Triples in which a top-k pair appears as the subject, scored with the
/// object-similarity table.
pub fn outbound_phase(ctx: &MatchContext<'_>, state: &MatchState, k: usize) -> PhaseOutput {
    let pairs = top_k_pairs(state, ctx.g2, k);
    par::map(&pairs, |&(e1, e2, score)| {
        let mut out = Vec::new();
        for &t1 in ctx.g1.triples_with_subject(e1) {
            for &t2 in ctx.g2.triples_with_subject(e2) {
                if ctx.predicates.get(ctx.g1.stored(t1).predicate, ctx.g2.stored(t2).predicate).is_none() {
                    continue;
                }
                let obj = ctx.object_similarity(state, t1, t2);
                if let Some(f) = ctx.factors(t1, t2, score, obj) {
                    out.push(((t1, t2), f.similarity()));
                }
            }
        }
        out
    })
    .into_iter()
    .flatten()
    .collect()
}

/// Triple-based entity confidence for every subject pair and entity
/// object pair touched by a triple mapping.
pub fn aggregate_entity_triples(
    g1: &KnowledgeGraph,
    g2: &KnowledgeGraph,
    triples: &BTreeMap<TriplePairKey, TripleScore>,
) -> BTreeMap<PairKey, f64> {
    let mut grouped: BTreeMap<PairKey, Vec<f64>> = BTreeMap::new();
    for (&(t1, t2), s) in triples {
        let a = g1.stored(t1);
        let b = g2.stored(t2);
        grouped.entry((a.subject, b.subject)).or_default().push(s.compat);
        if let (ObjectRef::Entity(o1), ObjectRef::Entity(o2)) = (a.object, b.object) {
            if (o1, o2) != (a.subject, b.subject) {
                grouped.entry((o1, o2)).or_default().push(s.compat);
            }
        }
    }
    grouped.into_iter().map(|(k, v)| (k, entity_similarity_from_triples(v))).collect()
}

/// Label-embedding similarity between entities, cached per entity.
struct LabelEmbeddings<'a> {
    provider: Option<&'a dyn EmbeddingProvider>,
    left: HashMap<NodeId, Vec<EmbeddingVector>>,
    right: HashMap<NodeId, Vec<EmbeddingVector>>,
    failed: bool,
}

impl<'a> LabelEmbeddings<'a> {
    fn new(provider: Option<&'a dyn EmbeddingProvider>) -> Self {
        Self { provider, left: HashMap::new(), right: HashMap::new(), failed: provider.is_none() }
    }

    fn prefetch(&mut self, g1: &KnowledgeGraph, g2: &KnowledgeGraph, pairs: &[PairKey], warnings: &mut Vec<String>) {
        if self.failed {
            return;
        }
        let Some(provider) = self.provider else { return };
        let mut need_left: Vec<NodeId> = pairs.iter().map(|p| p.0).filter(|n| !self.left.contains_key(n)).collect();
        let mut need_right: Vec<NodeId> = pairs.iter().map(|p| p.1).filter(|n| !self.right.contains_key(n)).collect();
        need_left.sort_unstable();
        need_left.dedup();
        need_right.sort_unstable();
        need_right.dedup();
        let texts_of = |kg: &KnowledgeGraph, ids: &[NodeId]| -> Vec<String> {
            ids.iter().flat_map(|&id| kg.labels(id).iter().map(|l| normalize_label(l))).collect()
        };
        let mut texts = texts_of(g1, &need_left);
        texts.extend(texts_of(g2, &need_right));
        if texts.is_empty() {
            return;
        }
        match provider.embed_batch(&texts) {
            Ok(vectors) => {
                let mut it = vectors.into_iter();
                for &id in &need_left {
                    self.left.insert(id, it.by_ref().take(g1.labels(id).len()).collect());
                }
                for &id in &need_right {
                    self.right.insert(id, it.by_ref().take(g2.labels(id).len()).collect());
                }
            }
            Err(e) => {
                let msg = format!("embedding provider failed, using fuzzy label similarity: {e}");
                log::warn!("{msg}");
                warnings.push(msg);
                self.failed = true;
            }
        }
    }

    fn similarity(&self, g1: &KnowledgeGraph, g2: &KnowledgeGraph, l: NodeId, r: NodeId) -> f64 {
        if let (false, Some(a), Some(b)) = (self.failed, self.left.get(&l), self.right.get(&r)) {
            return a.iter().flat_map(|x| b.iter().map(move |y| label_cosine(x, y))).fold(0.0, f64::max);
        }
        g1.labels(l)
            .iter()
            .flat_map(|x| g2.labels(r).iter().map(move |y| fuzzy_similarity(&normalize_label(x), &normalize_label(y))))
            .fold(0.0, f64::max)
    }
}

fn combine_all(
    ctx: &MatchContext<'_>,
    state: &mut MatchState,
    embeddings: &mut LabelEmbeddings<'_>,
) -> BTreeMap<PairKey, EntityScore> {
    let triple_only: Vec<PairKey> =
        state.entity_triple.keys().filter(|k| !state.label.contains_key(k)).copied().collect();
    embeddings.prefetch(ctx.g1, ctx.g2, &triple_only, &mut state.warnings);
    let mut out = BTreeMap::new();
    for (&k, &c) in &state.label {
        out.insert(k, EntityScore { label: Some(c), triple: None, combined: 0.5 * c });
    }
    for (&k, &t) in &state.entity_triple {
        let label = state.label.get(&k).copied();
        let combined = combine_entity_similarity(label, Some(t), || embeddings.similarity(ctx.g1, ctx.g2, k.0, k.1))
            .expect("confidences are in range");
        out.insert(k, EntityScore { label, triple: Some(t), combined });
    }
    out
}

/// Runs up to `max_iterations` rounds of the three phases, stopping early
/// once neither the matched-source count grows nor the top-1 targets shift
/// by more than the configured fractions.
pub fn run_pipeline(
    ctx: &MatchContext<'_>,
    entity_label_mappings: &[LabelMapping],
    common: &CommonLiteralSet,
    embedder: Option<&dyn EmbeddingProvider>,
) -> MatchState {
    let mut state = MatchState::new(ctx, entity_label_mappings);
    let mut embeddings = LabelEmbeddings::new(embedder);
    let cfg = &ctx.config;
    let max_iterations = cfg.max_iterations.clamp(1, 10);
    let mut prev_top1 = state.top1(ctx.g2);
    let mut prev_count = state.matched_sources();
    for iteration in 1..=max_iterations {
        state.iteration = iteration;
        let exact = exact_attribute_phase(ctx, &state, common);
        let inbound = inbound_phase(ctx, &state, cfg.k_top);
        let outbound = outbound_phase(ctx, &state, cfg.k_top);
        let counts = (exact.len(), inbound.len(), outbound.len());

        let mut round: BTreeMap<TriplePairKey, (f64, Phase)> = BTreeMap::new();
        for (phase, results) in [(Phase::ExactAttribute, exact), (Phase::Inbound, inbound), (Phase::Outbound, outbound)] {
            for (key, compat) in results {
                let slot = round.entry(key).or_insert((compat, phase));
                if compat > slot.0 {
                    *slot = (compat, phase);
                }
            }
        }
        for (key, (compat, phase)) in round {
            state.triples.insert(key, TripleScore { compat, phase, iteration });
        }
        state.entity_triple = aggregate_entity_triples(ctx.g1, ctx.g2, &state.triples);
        state.entities = combine_all(ctx, &mut state, &mut embeddings);

        let top1 = state.top1(ctx.g2);
        let count = top1.len();
        let changed = top1.iter().filter(|(l, r)| prev_top1.get(l) != Some(r)).count();
        let changed_fraction = if count == 0 { 0.0 } else { changed as f64 / count as f64 };
        let grew = count as f64 > prev_count as f64 * (1.0 + cfg.growth_threshold);
        state.history.push(IterationRecord {
            iteration,
            exact_attribute_pairs: counts.0,
            inbound_pairs: counts.1,
            outbound_pairs: counts.2,
            triple_mappings: state.triples.len(),
            entity_pairs: state.entities.len(),
            matched_sources: count,
            previous_matched_sources: prev_count,
            top1_changed_fraction: changed_fraction,
            top_pairs: top1.iter().map(|(&l, &r)| (l, r)).collect(),
        });
        log::info!(
            "iteration {iteration}: {} triple pairs, {count} matched sources, {:.1}% top-1 changed",
            state.triples.len(),
            100.0 * changed_fraction
        );
        if !grew && changed_fraction <= cfg.shift_threshold {
            state.stop_reason = Some(StopReason::Converged);
            break;
        }
        prev_top1 = top1;
        prev_count = count;
    }
    if state.stop_reason.is_none() {
        state.stop_reason = Some(StopReason::MaxIterations);
    }
    state
}

/// Scores every outbound triple pair of each source entity's best target
/// for both compatibility and divergence.
pub fn compute_divergences(ctx: &MatchContext<'_>, state: &MatchState) -> Vec<TripleMapping> {
    let best: Vec<(NodeId, NodeId, f64)> = state
        .ranked_targets(ctx.g2)
        .into_iter()
        .filter_map(|(l, list)| list.first().map(|&(r, s)| (l, r, s)))
        .collect();
    let thresholds = ctx.config.thresholds;
    par::map(&best, |&(e1, e2, score)| {
        let mut out = Vec::new();
        for &t1 in ctx.g1.triples_with_subject(e1) {
            for &t2 in ctx.g2.triples_with_subject(e2) {
                if ctx.predicates.get(ctx.g1.stored(t1).predicate, ctx.g2.stored(t2).predicate).is_none() {
                    continue;
                }
                let obj = ctx.object_similarity(state, t1, t2);
                let Some(f) = ctx.factors(t1, t2, score, obj) else { continue };
                let compat = f.similarity();
                let divergence = f.divergence();
                out.push(TripleMapping {
                    left: t1,
                    right: t2,
                    compat,
                    divergence: Some(divergence),
                    phase: Phase::Outbound,
                    iteration: state.iteration,
                    classification: thresholds.classify(compat, Some(divergence)),
                });
            }
        }
        out
    })
    .into_iter()
    .flatten()
    .collect()
}
