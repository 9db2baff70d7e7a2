//! Tab-separated mapping files.
//!
//! Entity mappings: `left_iri  right_iri  combined  c_label  c_triple`, with
//! absent confidences left empty. Triple mappings carry both triples as
//! N-Triples terms followed by the scores, the phase and the class.

use std::io::{BufRead, Write};

use thiserror::Error;

use super::{EntityMapping, TripleMapping};
use crate::model::{Iri, KnowledgeGraph};

pub const ENTITY_TSV_HEADER: &str = "left_iri\tright_iri\tcombined\tc_label\tc_triple";
pub const TRIPLE_TSV_HEADER: &str = "s1\tp1\to1\ts2\tp2\to2\tcompat\tdivergence\tphase\tclassification";

#[derive(Debug, Error)]
pub enum OutputError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

pub fn write_entity_mappings<W: Write>(mut w: W, mappings: &[EntityMapping]) -> std::io::Result<()> {
    writeln!(w, "{ENTITY_TSV_HEADER}")?;
    for m in mappings {
        writeln!(
            w,
            "{}\t{}\t{:.6}\t{}\t{}",
            m.left,
            m.right,
            m.combined,
            opt(m.label_confidence),
            opt(m.triple_confidence)
        )?;
    }
    Ok(())
}

pub fn write_triple_mappings<W: Write>(
    mut w: W,
    g1: &KnowledgeGraph,
    g2: &KnowledgeGraph,
    mappings: &[TripleMapping],
) -> std::io::Result<()> {
    writeln!(w, "{TRIPLE_TSV_HEADER}")?;
    for m in mappings {
        let a = g1.triple(m.left);
        let b = g2.triple(m.right);
        writeln!(
            w,
            "<{}>\t<{}>\t{}\t<{}>\t<{}>\t{}\t{:.6}\t{}\t{}\t{}",
            a.subject,
            a.predicate,
            a.object.to_ntriples(),
            b.subject,
            b.predicate,
            b.object.to_ntriples(),
            m.compat,
            opt(m.divergence),
            m.phase.as_str(),
            m.classification.as_str()
        )?;
    }
    Ok(())
}

/// One parsed row of an entity mappings file.
#[derive(Debug, Clone, PartialEq)]
pub struct EntityMappingRecord {
    pub left: Iri,
    pub right: Iri,
    pub combined: f64,
    pub label_confidence: Option<f64>,
    pub triple_confidence: Option<f64>,
}

/// Reads an entity mappings file. A header line is optional; the last two
/// columns may be absent.
pub fn read_entity_mappings<R: BufRead>(r: R) -> Result<Vec<EntityMappingRecord>, OutputError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let n = i + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') || (i == 0 && line.starts_with("left_iri")) {
            continue;
        }
        let bad = |message: String| OutputError::Malformed { line: n, message };
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < 3 {
            return Err(bad(format!("expected at least 3 columns, found {}", cols.len())));
        }
        let iri = |s: &str| {
            let s = s.trim().trim_start_matches('<').trim_end_matches('>');
            Iri::new(s).map_err(|e| bad(e.to_string()))
        };
        let num = |s: &str| -> Result<Option<f64>, OutputError> {
            let s = s.trim();
            if s.is_empty() {
                return Ok(None);
            }
            let v: f64 = s.parse().map_err(|_| bad(format!("not a number: {s:?}")))?;
            if !(0.0..=1.0).contains(&v) {
                return Err(bad(format!("confidence {v} outside [0, 1]")));
            }
            Ok(Some(v))
        };
        let combined = num(cols[2])?.ok_or_else(|| bad("missing combined confidence".into()))?;
        out.push(EntityMappingRecord {
            left: iri(cols[0])?,
            right: iri(cols[1])?,
            combined,
            label_confidence: cols.get(3).map(|s| num(s)).transpose()?.flatten(),
            triple_confidence: cols.get(4).map(|s| num(s)).transpose()?.flatten(),
        });
    }
    Ok(out)
}
