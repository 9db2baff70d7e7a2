//! Binary index snapshot.
//!
//! Layout: the 8-byte magic `FTMSNAP1`, a little-endian `u32` format
//! version, then five sections in fixed order (IRIs, literals, triples,
//! labels, stats). Each section is a `u64` byte length, the payload and
//! the CRC-32 of the payload.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::model::{
    classify_literal, Iri, KnowledgeGraph, LiteralId, LiteralValue, NodeId, ObjectRef, PredicateStats, StoredTriple,
};

pub const SNAPSHOT_MAGIC: &[u8; 8] = b"FTMSNAP1";
pub const SNAPSHOT_VERSION: u32 = 1;

const SECTIONS: [&str; 5] = ["iris", "literals", "triples", "labels", "stats"];

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("snapshot io: {0}")]
    Io(#[from] std::io::Error),
    #[error("snapshot checksum error in {section} section (file truncated or corrupt)")]
    Checksum { section: &'static str },
    #[error("not a snapshot file (bad magic)")]
    BadMagic,
    #[error("unsupported snapshot version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("malformed snapshot {section} section: {message}")]
    Malformed { section: &'static str, message: String },
}

#[derive(Default)]
struct Enc(Vec<u8>);

impl Enc {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn str(&mut self, s: &str) {
        self.u64(s.len() as u64);
        self.0.extend_from_slice(s.as_bytes());
    }
    fn opt_str(&mut self, s: Option<&str>) {
        match s {
            Some(s) => {
                self.u8(1);
                self.str(s);
            }
            None => self.u8(0),
        }
    }
}

struct Dec<'a> {
    buf: &'a [u8],
    section: &'static str,
}

impl<'a> Dec<'a> {
    fn err(&self, message: impl Into<String>) -> SnapshotError {
        SnapshotError::Malformed { section: self.section, message: message.into() }
    }
    fn take(&mut self, n: usize) -> Result<&'a [u8], SnapshotError> {
        if self.buf.len() < n {
            return Err(self.err("unexpected end of section"));
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }
    fn u8(&mut self) -> Result<u8, SnapshotError> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32, SnapshotError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
    fn u64(&mut self) -> Result<u64, SnapshotError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn str(&mut self) -> Result<String, SnapshotError> {
        let n = usize::try_from(self.u64()?).map_err(|_| self.err("length overflow"))?;
        let bytes = self.take(n)?;
        String::from_utf8(bytes.to_vec()).map_err(|_| self.err("invalid utf-8"))
    }
    fn opt_str(&mut self) -> Result<Option<String>, SnapshotError> {
        match self.u8()? {
            0 => Ok(None),
            1 => self.str().map(Some),
            t => Err(self.err(format!("bad option tag {t}"))),
        }
    }
    fn iri(&mut self) -> Result<Iri, SnapshotError> {
        let s = self.str()?;
        Iri::new(&s).map_err(|e| self.err(e.to_string()))
    }
}

fn encode(kg: &KnowledgeGraph) -> [Vec<u8>; 5] {
    let mut iris = Enc::default();
    iris.u64(kg.iris().len() as u64);
    for iri in kg.iris() {
        iris.str(iri.as_str());
    }

    let mut literals = Enc::default();
    literals.u64(kg.literals().len() as u64);
    for lit in kg.literals() {
        literals.str(&lit.raw);
        literals.opt_str(lit.datatype_iri.as_ref().map(Iri::as_str));
        literals.opt_str(lit.language_tag.as_deref());
    }

    let mut triples = Enc::default();
    triples.u64(kg.len() as u64);
    for t in kg.stored_triples() {
        triples.u32(t.subject.0);
        triples.u32(t.predicate.0);
        match t.object {
            ObjectRef::Entity(n) => {
                triples.u8(0);
                triples.u32(n.0);
            }
            ObjectRef::Literal(l) => {
                triples.u8(1);
                triples.u32(l.0);
            }
        }
    }

    let mut labels = Enc::default();
    labels.u64(kg.label_table().len() as u64);
    for set in kg.label_table() {
        labels.u64(set.len() as u64);
        for l in set {
            labels.str(l);
        }
    }

    let mut stats = Enc::default();
    stats.u64(kg.all_stats().count() as u64);
    for s in kg.all_stats() {
        let id = kg.node_id(&s.predicate).expect("stats predicate is interned");
        stats.u32(id.0);
        stats.u64(s.triple_count);
        stats.u64(s.distinct_subjects);
        stats.u64(s.distinct_objects);
    }
    [iris.0, literals.0, triples.0, labels.0, stats.0]
}

pub fn snapshot_save(kg: &KnowledgeGraph, path: &Path) -> Result<(), SnapshotError> {
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(SNAPSHOT_MAGIC)?;
    out.write_all(&SNAPSHOT_VERSION.to_le_bytes())?;
    for payload in encode(kg) {
        out.write_all(&(payload.len() as u64).to_le_bytes())?;
        out.write_all(&payload)?;
        out.write_all(&crc32fast::hash(&payload).to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

fn read_section<R: Read>(input: &mut R, section: &'static str) -> Result<Vec<u8>, SnapshotError> {
    let checksum = || SnapshotError::Checksum { section };
    let mut len = [0u8; 8];
    input.read_exact(&mut len).map_err(|_| checksum())?;
    let len = u64::from_le_bytes(len);
    let mut payload = Vec::new();
    input.by_ref().take(len).read_to_end(&mut payload)?;
    if payload.len() as u64 != len {
        return Err(checksum());
    }
    let mut crc = [0u8; 4];
    input.read_exact(&mut crc).map_err(|_| checksum())?;
    if crc32fast::hash(&payload) != u32::from_le_bytes(crc) {
        return Err(checksum());
    }
    Ok(payload)
}

pub fn snapshot_load(path: &Path) -> Result<KnowledgeGraph, SnapshotError> {
    let mut input = BufReader::new(File::open(path)?);
    let mut header = [0u8; 12];
    input.read_exact(&mut header).map_err(|_| SnapshotError::Checksum { section: "header" })?;
    if &header[..8] != SNAPSHOT_MAGIC {
        return Err(SnapshotError::BadMagic);
    }
    let version = u32::from_le_bytes(header[8..].try_into().expect("4 bytes"));
    if version != SNAPSHOT_VERSION {
        return Err(SnapshotError::Version { found: version, expected: SNAPSHOT_VERSION });
    }
    let mut payloads = Vec::with_capacity(SECTIONS.len());
    for section in SECTIONS {
        payloads.push(read_section(&mut input, section)?);
    }
    let mut trailing = [0u8; 1];
    if input.read(&mut trailing)? != 0 {
        return Err(SnapshotError::Malformed { section: "stats", message: "trailing bytes".into() });
    }
    decode(&payloads)
}

fn decode(p: &[Vec<u8>]) -> Result<KnowledgeGraph, SnapshotError> {
    let mut d = Dec { buf: &p[0], section: "iris" };
    let n = d.u64()? as usize;
    let mut iris = Vec::with_capacity(n.min(1 << 24));
    for _ in 0..n {
        iris.push(d.iri()?);
    }

    let mut d = Dec { buf: &p[1], section: "literals" };
    let n = d.u64()? as usize;
    let mut literals: Vec<LiteralValue> = Vec::with_capacity(n.min(1 << 24));
    for _ in 0..n {
        let raw = d.str()?;
        let dt = d.opt_str()?.map(|s| Iri::new(&s)).transpose().map_err(|e| d.err(e.to_string()))?;
        let lang = d.opt_str()?;
        let mut lit = classify_literal(&raw, dt.as_ref());
        if let Some(tag) = lang {
            lit = lit.with_language(tag);
        }
        literals.push(lit);
    }

    let mut d = Dec { buf: &p[2], section: "triples" };
    let n = d.u64()? as usize;
    let mut triples = Vec::with_capacity(n.min(1 << 26));
    let node_count = iris.len();
    let node = |d: &mut Dec<'_>| -> Result<NodeId, SnapshotError> {
        let v = d.u32()?;
        if (v as usize) < node_count {
            Ok(NodeId(v))
        } else {
            Err(d.err(format!("node id {v} out of range")))
        }
    };
    for _ in 0..n {
        let subject = node(&mut d)?;
        let predicate = node(&mut d)?;
        let object = match d.u8()? {
            0 => ObjectRef::Entity(node(&mut d)?),
            1 => {
                let l = d.u32()?;
                if l as usize >= literals.len() {
                    return Err(d.err(format!("literal id {l} out of range")));
                }
                ObjectRef::Literal(LiteralId(l))
            }
            t => return Err(d.err(format!("bad object tag {t}"))),
        };
        triples.push(StoredTriple { subject, predicate, object });
    }

    let mut d = Dec { buf: &p[3], section: "labels" };
    let n = d.u64()? as usize;
    if n != iris.len() {
        return Err(d.err("label table size does not match the IRI table"));
    }
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let k = d.u64()? as usize;
        let mut set = Vec::with_capacity(k.min(1024));
        for _ in 0..k {
            set.push(d.str()?);
        }
        labels.push(set);
    }

    let mut d = Dec { buf: &p[4], section: "stats" };
    let n = d.u64()? as usize;
    let mut stats = std::collections::BTreeMap::new();
    for _ in 0..n {
        let id = node(&mut d)?;
        let (count, subjects, objects) = (d.u64()?, d.u64()?, d.u64()?);
        stats.insert(id, PredicateStats::from_counts(iris[id.0 as usize].clone(), count, subjects, objects));
    }
    Ok(KnowledgeGraph::assemble(iris, literals, triples, labels, Some(stats)))
}
