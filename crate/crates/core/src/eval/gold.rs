//! Gold-standard readers: two-column TSV and OAEI alignment XML.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;
use std::path::Path;

use quick_xml::events::Event;
use thiserror::Error;

use crate::model::{Iri, Triple};

use super::TripleLabel;

#[derive(Debug, Error)]
pub enum GoldError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Tsv { line: usize, message: String },
    #[error("alignment xml: {0}")]
    Xml(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoldTriplePair {
    pub left: Triple,
    pub right: Triple,
    pub label: TripleLabel,
}

/// Reference alignments, stored left graph first.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GoldStandard {
    pub entity_pairs: BTreeSet<(Iri, Iri)>,
    pub predicate_pairs: BTreeSet<(Iri, Iri)>,
    pub triple_pairs: Vec<GoldTriplePair>,
}

impl GoldStandard {
    pub fn from_entity_pairs(pairs: impl IntoIterator<Item = (Iri, Iri)>) -> Self {
        Self { entity_pairs: pairs.into_iter().collect(), ..Default::default() }
    }

    pub fn is_empty(&self) -> bool {
        self.entity_pairs.is_empty() && self.predicate_pairs.is_empty() && self.triple_pairs.is_empty()
    }

    pub fn contains(&self, left: &Iri, right: &Iri) -> bool {
        self.entity_pairs.contains(&(left.clone(), right.clone()))
    }

    /// Gold partners of every left entity.
    pub fn left_index(&self) -> BTreeMap<&Iri, BTreeSet<&Iri>> {
        let mut out: BTreeMap<&Iri, BTreeSet<&Iri>> = BTreeMap::new();
        for (l, r) in &self.entity_pairs {
            out.entry(l).or_default().insert(r);
        }
        out
    }

    /// Gold partners of every right entity.
    pub fn right_index(&self) -> BTreeMap<&Iri, BTreeSet<&Iri>> {
        let mut out: BTreeMap<&Iri, BTreeSet<&Iri>> = BTreeMap::new();
        for (l, r) in &self.entity_pairs {
            out.entry(r).or_default().insert(l);
        }
        out
    }

    /// Splits entity pairs into predicate pairs when the left IRI names a
    /// predicate of the left graph.
    pub fn split_predicates(&mut self, is_left_predicate: impl Fn(&Iri) -> bool) {
        let (preds, ents): (BTreeSet<_>, BTreeSet<_>) =
            std::mem::take(&mut self.entity_pairs).into_iter().partition(|(l, _)| is_left_predicate(l));
        self.entity_pairs = ents;
        self.predicate_pairs.extend(preds);
    }
}

fn parse_iri(s: &str) -> Result<Iri, String> {
    let s = s.trim();
    let s = s.strip_prefix('<').and_then(|x| x.strip_suffix('>')).unwrap_or(s);
    Iri::new(s).map_err(|e| e.to_string())
}

/// `left \t right` per line; extra columns, blank lines, `#` comments and a
/// leading `left...` header are ignored.
pub fn read_gold_tsv<R: BufRead>(reader: R) -> Result<GoldStandard, GoldError> {
    let mut gold = GoldStandard::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| GoldError::Io { path: "<tsv>".into(), source })?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') || (i == 0 && line.starts_with("left")) {
            continue;
        }
        let err = |message: String| GoldError::Tsv { line: i + 1, message };
        let mut cols = line.split('\t');
        let (Some(l), Some(r)) = (cols.next(), cols.next()) else {
            return Err(err("expected two tab-separated IRIs".into()));
        };
        gold.entity_pairs.insert((parse_iri(l).map_err(err)?, parse_iri(r).map_err(err)?));
    }
    Ok(gold)
}

/// Cells of an OAEI alignment. Only equivalence cells (`=` or no relation)
/// are kept.
pub fn read_gold_oaei<R: BufRead>(reader: R) -> Result<GoldStandard, GoldError> {
    let mut xml = quick_xml::Reader::from_reader(reader);
    let mut buf = Vec::new();
    let mut gold = GoldStandard::default();
    let mut cell: Option<(Option<String>, Option<String>, Option<String>)> = None;
    let mut in_relation = false;
    let xml_err = |e: &dyn std::fmt::Display| GoldError::Xml(e.to_string());
    loop {
        let event = xml.read_event_into(&mut buf).map_err(|e| xml_err(&e))?;
        match event {
            Event::Start(ref e) | Event::Empty(ref e) => {
                let local = e.local_name();
                match local.as_ref() {
                    b"Cell" => {
                        if matches!(event, Event::Start(_)) {
                            cell = Some((None, None, None));
                        }
                    }
                    name @ (b"entity1" | b"entity2") => {
                        let mut value = None;
                        for attr in e.attributes() {
                            let attr = attr.map_err(|e| xml_err(&e))?;
                            if attr.key.local_name().as_ref() == b"resource" {
                                value = Some(attr.unescape_value().map_err(|e| xml_err(&e))?.into_owned());
                            }
                        }
                        if let Some(c) = cell.as_mut() {
                            if name == b"entity1" {
                                c.0 = value;
                            } else {
                                c.1 = value;
                            }
                        }
                    }
                    b"relation" => in_relation = matches!(event, Event::Start(_)),
                    _ => {}
                }
            }
            Event::Text(t) if in_relation => {
                if let Some(c) = cell.as_mut() {
                    c.2 = Some(t.unescape().map_err(|e| xml_err(&e))?.trim().to_string());
                }
            }
            Event::End(ref e) => match e.local_name().as_ref() {
                b"relation" => in_relation = false,
                b"Cell" => {
                    if let Some((l, r, rel)) = cell.take() {
                        let (Some(l), Some(r)) = (l, r) else {
                            return Err(GoldError::Xml("cell without entity1/entity2".into()));
                        };
                        if rel.as_deref().is_none_or(|x| x == "=" || x.is_empty()) {
                            gold.entity_pairs.insert((
                                parse_iri(&l).map_err(GoldError::Xml)?,
                                parse_iri(&r).map_err(GoldError::Xml)?,
                            ));
                        }
                    }
                }
                _ => {}
            },
            Event::Eof => break,
            _ => {}
        }
        buf.clear();
    }
    Ok(gold)
}

/// Chooses the reader by extension (`.xml`, `.rdf`, `.owl`) or, failing
/// that, by a leading `<`.
pub fn load_gold(path: &Path) -> Result<GoldStandard, GoldError> {
    let io = |source| GoldError::Io { path: path.display().to_string(), source };
    let text = std::fs::read_to_string(path).map_err(io)?;
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
    if matches!(ext.as_str(), "xml" | "rdf" | "owl") || text.trim_start().starts_with('<') && !text.contains('\t') {
        read_gold_oaei(text.as_bytes())
    } else {
        read_gold_tsv(text.as_bytes())
    }
}
