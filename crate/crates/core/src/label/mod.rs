//! Tiered label confidence between entities and between predicates.
//!
//! | tier              | confidence            |
//! |-------------------|-----------------------|
//! | URI exact         | 1.0                   |
//! | label exact       | 0.9                   |
//! | normalized label  | 0.8                   |
//! | stopwords removed | 0.7                   |
//! | fuzzy             | 0.7 × fuzzy ratio     |
//! | embedding         | 0.7 × cosine (≥ 0)    |
//!
//! The last two tiers compare every label pair and only run over a full
//! cross product when the smaller side of an element class has fewer than
//! `cross_product_limit` elements; above that, only pairs sharing a
//! non-stopword normalized token are compared.

mod fuzzy;
mod normalize;

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::embedding::{label_cosine, EmbeddingProvider, EmbeddingVector};
use crate::model::{Iri, KnowledgeGraph, NodeId};
use crate::par;

pub use fuzzy::{fuzzy_similarity, indel_similarity};
pub use normalize::{normalize_label, stopwords, strip_stopwords};

pub const DEFAULT_FLOOR: f64 = 0.35;
pub const DEFAULT_CROSS_PRODUCT_LIMIT: usize = 1000;
const SOFT_TIER_WEIGHT: f64 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelTier {
    UriExact,
    LabelExact,
    Normalized,
    StopwordStripped,
    Fuzzy,
    Embedding,
}

impl LabelTier {
    pub fn ceiling(self) -> f64 {
        match self {
            LabelTier::UriExact => 1.0,
            LabelTier::LabelExact => 0.9,
            LabelTier::Normalized => 0.8,
            LabelTier::StopwordStripped | LabelTier::Fuzzy | LabelTier::Embedding => 0.7,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LabelTier::UriExact => "uri_exact",
            LabelTier::LabelExact => "label_exact",
            LabelTier::Normalized => "normalized",
            LabelTier::StopwordStripped => "stopword_stripped",
            LabelTier::Fuzzy => "fuzzy",
            LabelTier::Embedding => "embedding",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelMapping {
    pub left: Iri,
    pub right: Iri,
    pub confidence: f64,
    pub tier: LabelTier,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabelMatchConfig {
    pub floor: f64,
    pub cross_product_limit: usize,
}

impl Default for LabelMatchConfig {
    fn default() -> Self {
        Self { floor: DEFAULT_FLOOR, cross_product_limit: DEFAULT_CROSS_PRODUCT_LIMIT }
    }
}

/// Label forms of one element, prepared once.
#[derive(Debug, Clone, Default)]
struct Prepared {
    raw: Vec<String>,
    normalized: Vec<String>,
    stripped: Vec<String>,
}

impl Prepared {
    fn new(labels: &[String]) -> Self {
        let raw: Vec<String> = labels.iter().filter(|l| !l.is_empty()).cloned().collect();
        let normalized: Vec<String> = raw.iter().map(|l| normalize_label(l)).collect();
        let stripped = normalized.iter().map(|l| strip_stopwords(l)).collect();
        Self { raw, normalized, stripped }
    }
}

fn any_equal(a: &[String], b: &[String]) -> bool {
    a.iter().any(|x| !x.is_empty() && b.iter().any(|y| x == y))
}

struct Side<'a> {
    uri: &'a Iri,
    labels: &'a Prepared,
    vectors: Option<&'a [EmbeddingVector]>,
}

/// Best (tier, confidence) for a pair, before the floor is applied. Ties
/// keep the higher tier.
fn score(left: &Side<'_>, right: &Side<'_>, cross: bool) -> Option<(LabelTier, f64)> {
    if left.uri == right.uri {
        return Some((LabelTier::UriExact, 1.0));
    }
    if any_equal(&left.labels.raw, &right.labels.raw) {
        return Some((LabelTier::LabelExact, 0.9));
    }
    if any_equal(&left.labels.normalized, &right.labels.normalized) {
        return Some((LabelTier::Normalized, 0.8));
    }
    if any_equal(&left.labels.stripped, &right.labels.stripped) {
        return Some((LabelTier::StopwordStripped, 0.7));
    }
    if !cross {
        return None;
    }
    let mut best: Option<(LabelTier, f64)> = None;
    let mut consider = |tier, value: f64| {
        if value > best.map_or(0.0, |b| b.1) {
            best = Some((tier, value));
        }
    };
    let fuzzy = left
        .labels
        .normalized
        .iter()
        .flat_map(|a| right.labels.normalized.iter().map(move |b| fuzzy_similarity(a, b)))
        .fold(0.0, f64::max);
    consider(LabelTier::Fuzzy, SOFT_TIER_WEIGHT * fuzzy);
    if let (Some(lv), Some(rv)) = (left.vectors, right.vectors) {
        let cos = lv
            .iter()
            .flat_map(|a| rv.iter().map(move |b| label_cosine(a, b)))
            .fold(0.0, f64::max);
        consider(LabelTier::Embedding, SOFT_TIER_WEIGHT * cos);
    }
    best
}

/// Score of every tier that fires for a pair, floor not applied. The
/// emitted confidence is the maximum of these.
pub fn tier_scores(
    left_uri: &Iri,
    left_labels: &[String],
    right_uri: &Iri,
    right_labels: &[String],
    embedder: Option<&dyn EmbeddingProvider>,
    cross_product_enabled: bool,
) -> Vec<(LabelTier, f64)> {
    let lp = Prepared::new(left_labels);
    let rp = Prepared::new(right_labels);
    let mut out = Vec::new();
    if left_uri == right_uri {
        out.push((LabelTier::UriExact, 1.0));
    }
    if any_equal(&lp.raw, &rp.raw) {
        out.push((LabelTier::LabelExact, 0.9));
    }
    if any_equal(&lp.normalized, &rp.normalized) {
        out.push((LabelTier::Normalized, 0.8));
    }
    if any_equal(&lp.stripped, &rp.stripped) {
        out.push((LabelTier::StopwordStripped, 0.7));
    }
    if cross_product_enabled {
        let fuzzy = lp
            .normalized
            .iter()
            .flat_map(|a| rp.normalized.iter().map(move |b| fuzzy_similarity(a, b)))
            .fold(0.0, f64::max);
        out.push((LabelTier::Fuzzy, SOFT_TIER_WEIGHT * fuzzy));
        let mut warnings = Vec::new();
        let texts: Vec<String> = lp.normalized.iter().chain(&rp.normalized).cloned().collect();
        if let Some(v) = embed_or_warn(embedder, &texts, &mut warnings) {
            let (lv, rv) = v.split_at(lp.normalized.len());
            let cos = lv.iter().flat_map(|x| rv.iter().map(move |y| label_cosine(x, y))).fold(0.0, f64::max);
            out.push((LabelTier::Embedding, SOFT_TIER_WEIGHT * cos));
        }
    }
    out
}

fn embed_or_warn(
    embedder: Option<&dyn EmbeddingProvider>,
    texts: &[String],
    warnings: &mut Vec<String>,
) -> Option<Vec<EmbeddingVector>> {
    let embedder = embedder?;
    match embedder.embed_batch(texts) {
        Ok(v) => Some(v),
        Err(e) => {
            let msg = format!("embedding provider failed, falling back to fuzzy only: {e}");
            log::warn!("{msg}");
            warnings.push(msg);
            None
        }
    }
}

/// Confidence that two elements denote the same thing, judged by URI and
/// labels alone. Returns `None` below [`DEFAULT_FLOOR`].
pub fn label_confidence(
    left_uri: &Iri,
    left_labels: &[String],
    right_uri: &Iri,
    right_labels: &[String],
    embedder: Option<&dyn EmbeddingProvider>,
    cross_product_enabled: bool,
) -> Option<LabelMapping> {
    let lp = Prepared::new(left_labels);
    let rp = Prepared::new(right_labels);
    let mut warnings = Vec::new();
    let vectors = if cross_product_enabled {
        let texts: Vec<String> = lp.normalized.iter().chain(&rp.normalized).cloned().collect();
        embed_or_warn(embedder, &texts, &mut warnings)
    } else {
        None
    };
    let (lv, rv) = match &vectors {
        Some(v) => {
            let (a, b) = v.split_at(lp.normalized.len());
            (Some(a), Some(b))
        }
        None => (None, None),
    };
    let left = Side { uri: left_uri, labels: &lp, vectors: lv };
    let right = Side { uri: right_uri, labels: &rp, vectors: rv };
    score(&left, &right, cross_product_enabled)
        .filter(|(_, c)| *c >= DEFAULT_FLOOR)
        .map(|(tier, confidence)| LabelMapping {
            left: left_uri.clone(),
            right: right_uri.clone(),
            confidence,
            tier,
        })
}

#[derive(Debug, Clone, Default)]
pub struct LabelMatchOutput {
    pub entities: Vec<LabelMapping>,
    pub predicates: Vec<LabelMapping>,
    pub warnings: Vec<String>,
}

struct ClassIndex<'a> {
    ids: &'a [NodeId],
    prepared: Vec<Prepared>,
    vectors: Option<Vec<Vec<EmbeddingVector>>>,
}

impl<'a> ClassIndex<'a> {
    fn new(kg: &KnowledgeGraph, ids: &'a [NodeId]) -> Self {
        let prepared = ids.iter().map(|&id| Prepared::new(kg.labels(id))).collect();
        Self { ids, prepared, vectors: None }
    }

    fn attach_vectors(&mut self, embedder: Option<&dyn EmbeddingProvider>, warnings: &mut Vec<String>) {
        let texts: Vec<String> = self.prepared.iter().flat_map(|p| p.normalized.iter().cloned()).collect();
        if let Some(flat) = embed_or_warn(embedder, &texts, warnings) {
            let mut it = flat.into_iter();
            self.vectors = Some(
                self.prepared.iter().map(|p| it.by_ref().take(p.normalized.len()).collect()).collect(),
            );
        }
    }

    fn side<'s>(&'s self, kg: &'s KnowledgeGraph, idx: usize) -> Side<'s> {
        Side {
            uri: kg.iri(self.ids[idx]),
            labels: &self.prepared[idx],
            vectors: self.vectors.as_ref().map(|v| v[idx].as_slice()),
        }
    }
}

fn insert_postings(map: &mut HashMap<String, Vec<usize>>, keys: &[String], idx: usize) {
    for k in keys.iter().filter(|k| !k.is_empty()) {
        let list = map.entry(k.clone()).or_default();
        if list.last() != Some(&idx) {
            list.push(idx);
        }
    }
}

fn match_class(
    g1: &KnowledgeGraph,
    left_ids: &[NodeId],
    g2: &KnowledgeGraph,
    right_ids: &[NodeId],
    embedder: Option<&dyn EmbeddingProvider>,
    cfg: &LabelMatchConfig,
    warnings: &mut Vec<String>,
) -> Vec<LabelMapping> {
    let mut left = ClassIndex::new(g1, left_ids);
    let mut right = ClassIndex::new(g2, right_ids);
    let full_cross = left_ids.len().min(right_ids.len()) < cfg.cross_product_limit;

    // exact tiers through inverted indexes over the right side
    let mut by_uri: HashMap<&str, usize> = HashMap::new();
    let mut by_label: HashMap<String, Vec<usize>> = HashMap::new();
    let mut by_token: HashMap<String, Vec<usize>> = HashMap::new();
    for (idx, (&id, p)) in right_ids.iter().zip(&right.prepared).enumerate() {
        by_uri.insert(g2.iri(id).as_str(), idx);
        insert_postings(&mut by_label, &p.raw, idx);
        insert_postings(&mut by_label, &p.normalized, idx);
        insert_postings(&mut by_label, &p.stripped, idx);
        if !full_cross {
            let tokens: Vec<String> = p
                .normalized
                .iter()
                .flat_map(|l| l.split_whitespace())
                .filter(|t| !stopwords().contains(t))
                .map(str::to_string)
                .collect();
            insert_postings(&mut by_token, &tokens, idx);
        }
    }

    if !left_ids.is_empty() && !right_ids.is_empty() {
        left.attach_vectors(embedder, warnings);
        right.attach_vectors(embedder, warnings);
    }

    let left_indices: Vec<usize> = (0..left_ids.len()).collect();
    let per_left: Vec<Vec<LabelMapping>> = par::map(&left_indices, |&li| {
        let lside = left.side(g1, li);
        let lp = &left.prepared[li];
        let mut exact: BTreeSet<usize> = BTreeSet::new();
        if let Some(&ri) = by_uri.get(lside.uri.as_str()) {
            exact.insert(ri);
        }
        for key in lp.raw.iter().chain(&lp.normalized).chain(&lp.stripped) {
            if let Some(list) = by_label.get(key) {
                exact.extend(list.iter().copied());
            }
        }
        let cross: BTreeSet<usize> = if full_cross {
            (0..right_ids.len()).collect()
        } else {
            lp.normalized
                .iter()
                .flat_map(|l| l.split_whitespace())
                .filter(|t| !stopwords().contains(t))
                .filter_map(|t| by_token.get(t))
                .flatten()
                .copied()
                .collect()
        };
        exact
            .union(&cross)
            .filter_map(|&ri| {
                let rside = right.side(g2, ri);
                let (tier, confidence) = score(&lside, &rside, cross.contains(&ri))?;
                (confidence >= cfg.floor).then(|| LabelMapping {
                    left: lside.uri.clone(),
                    right: rside.uri.clone(),
                    confidence,
                    tier,
                })
            })
            .collect()
    });
    let mut out: Vec<LabelMapping> = per_left.into_iter().flatten().collect();
    out.sort_by(|a, b| (&a.left, &a.right).cmp(&(&b.left, &b.right)));
    out
}

/// Computes entity-entity and predicate-predicate label mappings between
/// two graphs.
pub fn build_label_mappings(
    g1: &KnowledgeGraph,
    g2: &KnowledgeGraph,
    embedder: Option<&dyn EmbeddingProvider>,
    cfg: &LabelMatchConfig,
) -> LabelMatchOutput {
    let mut warnings = Vec::new();
    let entities = match_class(g1, g1.entities(), g2, g2.entities(), embedder, cfg, &mut warnings);
    let predicates = match_class(g1, g1.predicates(), g2, g2.predicates(), embedder, cfg, &mut warnings);
    LabelMatchOutput { entities, predicates, warnings }
}
