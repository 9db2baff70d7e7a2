//! Evaluation: Hit@k, one-to-one precision/recall/F under an open-world
//! gold standard, threshold sweeps, and mechanical labeling of candidate
//! triple pairs.

mod gold;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::label::normalize_label;
use crate::model::{Iri, KnowledgeGraph, LiteralKind, LiteralValue, Term, Triple};
use crate::par;

pub use gold::{load_gold, read_gold_oaei, read_gold_tsv, GoldError, GoldStandard, GoldTriplePair};

pub const DEFAULT_SWEEP_STEP: f64 = 0.01;
pub const DEFAULT_FUNCTIONALITY_MIN: f64 = 0.8;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("k must be at least 1")]
    ZeroK,
    #[error("sweep step {0} outside (0, 0.5]")]
    Step(f64),
}

/// A predicted entity pair with its score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredPair {
    pub left: Iri,
    pub right: Iri,
    pub score: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EvalReport {
    pub hit_at: BTreeMap<usize, f64>,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    pub threshold: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    /// No pair survived filtering, so precision is reported as 0.
    pub precision_undefined: bool,
    /// The gold standard has no entity pairs.
    pub invalid: bool,
}

impl EvalReport {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize, threshold: f64) -> Self {
        let ratio = |n: usize, d: usize| if d == 0 { 0.0 } else { n as f64 / d as f64 };
        Self {
            precision: ratio(tp, tp + fp),
            recall: ratio(tp, tp + fn_),
            f_measure: ratio(2 * tp, 2 * tp + fp + fn_),
            threshold,
            tp,
            fp,
            fn_,
            precision_undefined: tp + fp == 0,
            invalid: tp + fn_ == 0,
            hit_at: BTreeMap::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.hit_at {
            let _ = writeln!(out, "Hit@{k}\t{v:.4}");
        }
        let _ = writeln!(out, "threshold\t{:.2}", self.threshold);
        let _ = writeln!(out, "TP {}  FP {}  FN {}", self.tp, self.fp, self.fn_);
        let _ = writeln!(out, "P {:.2}  R {:.2}  F {:.2}", self.precision, self.recall, self.f_measure);
        if self.precision_undefined {
            out.push_str("note: no predictions kept, precision undefined\n");
        }
        if self.invalid {
            out.push_str("note: empty gold\n");
        }
        out
    }
}

/// Targets per source ordered by score, ties broken by target IRI.
pub fn rank_predictions(predicted: &[ScoredPair]) -> BTreeMap<Iri, Vec<Iri>> {
    let mut by_source: BTreeMap<&Iri, Vec<&ScoredPair>> = BTreeMap::new();
    for p in predicted {
        by_source.entry(&p.left).or_default().push(p);
    }
    by_source
        .into_iter()
        .map(|(l, mut v)| {
            v.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.right.cmp(&b.right)));
            (l.clone(), v.into_iter().map(|p| p.right.clone()).collect())
        })
        .collect()
}

/// Fraction of gold sources with a gold target among their first `k`
/// ranked predictions.
pub fn hit_at_k(ranked: &BTreeMap<Iri, Vec<Iri>>, gold: &GoldStandard, k: usize) -> Result<f64, EvalError> {
    if k == 0 {
        return Err(EvalError::ZeroK);
    }
    let index = gold.left_index();
    if index.is_empty() {
        return Ok(0.0);
    }
    let hits = index
        .iter()
        .filter(|(l, targets)| ranked.get(**l).is_some_and(|list| list.iter().take(k).any(|r| targets.contains(r))))
        .count();
    Ok(hits as f64 / index.len() as f64)
}

/// Pairs kept after thresholding and the one-to-one selection: for each
/// source, every target tied at the maximum score.
pub fn select_one_to_one(predicted: &[ScoredPair], threshold: f64) -> BTreeSet<(Iri, Iri)> {
    let mut best: BTreeMap<&Iri, (f64, Vec<&Iri>)> = BTreeMap::new();
    for p in predicted.iter().filter(|p| p.score >= threshold) {
        let slot = best.entry(&p.left).or_insert((p.score, Vec::new()));
        if p.score > slot.0 {
            *slot = (p.score, Vec::new());
        }
        if p.score == slot.0 {
            slot.1.push(&p.right);
        }
    }
    best.into_iter().flat_map(|(l, (_, rs))| rs.into_iter().map(move |r| (l.clone(), r.clone()))).collect()
}

/// Open-world precision, recall and F at one threshold. Pairs touching no
/// gold entity are ignored; a kept pair with a gold entity on either side
/// and the wrong partner is a false positive.
pub fn prf_one_to_one(predicted: &[ScoredPair], gold: &GoldStandard, threshold: f64) -> EvalReport {
    let kept = select_one_to_one(predicted, threshold);
    let lefts = gold.left_index();
    let rights = gold.right_index();
    let (mut tp, mut fp) = (0, 0);
    for (l, r) in &kept {
        if gold.entity_pairs.contains(&(l.clone(), r.clone())) {
            tp += 1;
        } else if lefts.contains_key(l) || rights.contains_key(r) {
            fp += 1;
        }
    }
    let fn_ = gold.entity_pairs.iter().filter(|p| !kept.contains(*p)).count();
    let mut report = EvalReport::from_counts(tp, fp, fn_, threshold);
    report.invalid = gold.entity_pairs.is_empty();
    report
}

/// Grid points `0, step, 2·step, …` up to and including 1.
pub fn sweep_grid(step: f64) -> Result<Vec<f64>, EvalError> {
    if !(step > 0.0 && step <= 0.5) {
        return Err(EvalError::Step(step));
    }
    let n = (1.0 / step).round() as usize;
    let mut grid: Vec<f64> = (0..=n).map(|i| (i as f64 * step).min(1.0)).collect();
    if *grid.last().unwrap() < 1.0 {
        grid.push(1.0);
    }
    grid.dedup();
    Ok(grid)
}

/// Evaluates every grid threshold and returns the report with the highest
/// F; ties go to the lowest threshold.
pub fn threshold_sweep(predicted: &[ScoredPair], gold: &GoldStandard, step: f64) -> Result<EvalReport, EvalError> {
    let grid = sweep_grid(step)?;
    let reports = par::map(&grid, |&t| prf_one_to_one(predicted, gold, t));
    let mut best = reports[0].clone();
    for r in reports.into_iter().skip(1) {
        if r.f_measure > best.f_measure {
            best = r;
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TripleLabel {
    Compatible,
    Divergent,
    NeedsReview,
}

impl TripleLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            TripleLabel::Compatible => "compatible",
            TripleLabel::Divergent => "divergent",
            TripleLabel::NeedsReview => "needs_review",
        }
    }
}

/// A triple with the labels of its object when the object is an entity.
#[derive(Debug, Clone, Copy)]
pub struct LabeledTriple<'a> {
    pub triple: &'a Triple,
    pub object_labels: &'a [String],
}

impl<'a> LabeledTriple<'a> {
    pub fn new(triple: &'a Triple) -> Self {
        Self { triple, object_labels: &[] }
    }

    pub fn with_labels(triple: &'a Triple, object_labels: &'a [String]) -> Self {
        Self { triple, object_labels }
    }
}

fn numbers_agree(a: f64, b: f64) -> bool {
    let d = (a - b).abs();
    d < 0.1 * a.abs().max(b.abs()) || (a.abs() < 100.0 && b.abs() < 100.0 && d < 10.0)
}

fn literals_agree(a: &LiteralValue, b: &LiteralValue) -> TripleLabel {
    use LiteralKind::*;
    match (a.kind, b.kind) {
        (Number, Number) => match (a.parsed_number, b.parsed_number) {
            (Some(x), Some(y)) if numbers_agree(x, y) => TripleLabel::Compatible,
            _ => TripleLabel::Divergent,
        },
        (DateTime, DateTime) => match (a.parsed_timestamp, b.parsed_timestamp) {
            (Some(x), Some(y)) if x.div_euclid(86_400) == y.div_euclid(86_400) => TripleLabel::Compatible,
            _ => TripleLabel::Divergent,
        },
        (Text, Text) => {
            if normalize_label(&a.raw) == normalize_label(&b.raw) {
                TripleLabel::Compatible
            } else {
                TripleLabel::NeedsReview
            }
        }
        _ => TripleLabel::Divergent,
    }
}

fn entity_vs_literal(labels: &[String], lit: &LiteralValue) -> TripleLabel {
    let target = normalize_label(&lit.raw);
    if labels.iter().any(|l| normalize_label(l) == target) {
        TripleLabel::Compatible
    } else {
        TripleLabel::Divergent
    }
}

/// Mechanical label for a triple pair whose subjects and predicates are
/// already gold-matched.
pub fn auto_label_triple_pair(t1: LabeledTriple<'_>, t2: LabeledTriple<'_>, gold: &GoldStandard) -> TripleLabel {
    match (&t1.triple.object, &t2.triple.object) {
        (Term::Entity(a), Term::Entity(b)) => {
            if gold.contains(a, b) {
                return TripleLabel::Compatible;
            }
            let elsewhere_left = gold.entity_pairs.iter().any(|(l, r)| l == a && r != b);
            let elsewhere_right = gold.entity_pairs.iter().any(|(l, r)| r == b && l != a);
            if elsewhere_left || elsewhere_right {
                TripleLabel::Divergent
            } else {
                TripleLabel::NeedsReview
            }
        }
        (Term::Entity(_), Term::Literal(lit)) => entity_vs_literal(t1.object_labels, lit),
        (Term::Literal(lit), Term::Entity(_)) => entity_vs_literal(t2.object_labels, lit),
        (Term::Literal(a), Term::Literal(b)) => literals_agree(a, b),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TripleCandidate {
    pub left: Triple,
    pub right: Triple,
    pub label: TripleLabel,
}

/// Candidate triple pairs for a triple-level gold standard: gold predicate
/// pairs whose predicates both exceed `fun_min` in functionality, crossed
/// with the triples of gold-matched subjects.
pub fn build_triple_dataset(
    g1: &KnowledgeGraph,
    g2: &KnowledgeGraph,
    gold: &GoldStandard,
    fun_min: f64,
) -> Vec<TripleCandidate> {
    let predicates: Vec<_> = gold
        .predicate_pairs
        .iter()
        .filter_map(|(p1, p2)| Some((g1.node_id(p1)?, g2.node_id(p2)?)))
        .filter(|&(p1, p2)| g1.functionality(p1) > fun_min && g2.functionality(p2) > fun_min)
        .collect();
    let mut out = Vec::new();
    for (s1, s2) in &gold.entity_pairs {
        let (Some(s1), Some(s2)) = (g1.node_id(s1), g2.node_id(s2)) else { continue };
        for &(p1, p2) in &predicates {
            let left: Vec<_> = g1.triples_with_subject(s1).iter().filter(|&&t| g1.stored(t).predicate == p1).collect();
            let right: Vec<_> = g2.triples_with_subject(s2).iter().filter(|&&t| g2.stored(t).predicate == p2).collect();
            for &&a in &left {
                for &&b in &right {
                    let (ta, tb) = (g1.triple(a), g2.triple(b));
                    let la = object_labels(g1, &ta);
                    let lb = object_labels(g2, &tb);
                    let label =
                        auto_label_triple_pair(LabeledTriple::with_labels(&ta, la), LabeledTriple::with_labels(&tb, lb), gold);
                    out.push(TripleCandidate { left: ta, right: tb, label });
                }
            }
        }
    }
    out
}

fn object_labels<'g>(kg: &'g KnowledgeGraph, t: &Triple) -> &'g [String] {
    t.object.as_entity().and_then(|i| kg.node_id(i)).map_or(&[], |id| kg.labels(id))
}

pub const TRIPLE_GOLD_HEADER: &str = "s1\tp1\to1\ts2\tp2\to2\tlabel";

pub fn write_triple_candidates<W: std::io::Write>(mut w: W, rows: &[TripleCandidate]) -> std::io::Result<()> {
    writeln!(w, "{TRIPLE_GOLD_HEADER}")?;
    for c in rows {
        writeln!(
            w,
            "<{}>\t<{}>\t{}\t<{}>\t<{}>\t{}\t{}",
            c.left.subject,
            c.left.predicate,
            c.left.object.to_ntriples(),
            c.right.subject,
            c.right.predicate,
            c.right.object.to_ntriples(),
            c.label.as_str()
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests;
