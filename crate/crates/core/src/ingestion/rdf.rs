use std::io::Read;

use oxrdf::{Subject, Term as OxTerm};
use oxttl::{NTriplesParser, TurtleParseError, TurtleParser};

use super::{IngestError, RdfFormat};
use crate::model::{classify_literal, GraphBuilder, Iri, KnowledgeGraph, Term, Triple};

fn subject_iri(s: Subject) -> Result<Iri, String> {
    #[allow(unreachable_patterns)]
    match s {
        Subject::NamedNode(n) => Iri::new(n.into_string()).map_err(|e| e.to_string()),
        Subject::BlankNode(b) => Iri::new(format!("_:{}", b.as_str())).map_err(|e| e.to_string()),
        _ => Err("quoted triples are not supported".into()),
    }
}

fn object_term(o: OxTerm) -> Result<Term, String> {
    #[allow(unreachable_patterns)]
    match o {
        OxTerm::NamedNode(n) => Iri::new(n.into_string()).map(Term::Entity).map_err(|e| e.to_string()),
        OxTerm::BlankNode(b) => Iri::new(format!("_:{}", b.as_str())).map(Term::Entity).map_err(|e| e.to_string()),
        OxTerm::Literal(l) => {
            let (value, datatype, language) = l.destruct();
            let datatype = datatype.map(|d| Iri::new(d.into_string())).transpose().map_err(|e| e.to_string())?;
            let mut lit = classify_literal(&value, datatype.as_ref());
            if let Some(tag) = language {
                lit = lit.with_language(tag);
            }
            Ok(Term::Literal(lit))
        }
        _ => Err("quoted triples are not supported".into()),
    }
}

fn convert(t: oxrdf::Triple) -> Result<Triple, String> {
    Ok(Triple::new(
        subject_iri(t.subject)?,
        Iri::new(t.predicate.into_string()).map_err(|e| e.to_string())?,
        object_term(t.object)?,
    ))
}

fn parse_error(err: TurtleParseError, origin: &str) -> IngestError {
    match err {
        TurtleParseError::Syntax(e) => {
            let start = e.location().start;
            IngestError::Parse {
                path: origin.to_string(),
                line: start.line + 1,
                offset: start.offset,
                message: e.message().to_string(),
            }
        }
        TurtleParseError::Io(source) => IngestError::Io { path: origin.to_string(), source },
    }
}

/// Streams triples from `reader` into a new graph. The input is never held
/// in memory as a whole.
pub fn load_reader<R: Read>(
    reader: R,
    format: RdfFormat,
    label_predicates: &[Iri],
    origin: &str,
) -> Result<KnowledgeGraph, IngestError> {
    let mut builder = GraphBuilder::new(label_predicates);
    let mut sink = |item: Result<oxrdf::Triple, TurtleParseError>, index: u64| -> Result<(), IngestError> {
        let triple = item.map_err(|e| parse_error(e, origin))?;
        let triple = convert(triple)
            .map_err(|message| IngestError::Parse {
                path: origin.to_string(),
                line: 0,
                offset: 0,
                message: format!("triple {index}: {message}"),
            })?;
        builder.insert(triple);
        Ok(())
    };
    match format {
        RdfFormat::NTriples => {
            let mut parser = NTriplesParser::new().for_reader(reader);
            let mut n = 0;
            while let Some(item) = parser.next() {
                n += 1;
                sink(item, n)?;
            }
        }
        RdfFormat::Turtle => {
            let mut parser = TurtleParser::new().for_reader(reader);
            let mut n = 0;
            while let Some(item) = parser.next() {
                n += 1;
                sink(item, n)?;
            }
        }
    }
    Ok(builder.finish())
}

pub fn parse_ntriples_str(text: &str, label_predicates: &[Iri]) -> Result<KnowledgeGraph, IngestError> {
    load_reader(text.as_bytes(), RdfFormat::NTriples, label_predicates, "<string>")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::default_label_predicates;

    const FIXTURE: &str = "\
<http://ex.org/Behind_Enemy_Lines> <http://ex.org/episode> \"5\"^^<http://www.w3.org/2001/XMLSchema#integer> .
<http://ex.org/Behind_Enemy_Lines> <http://ex.org/series> <http://ex.org/Star_Trek> .
<http://ex.org/Star_Trek> <http://ex.org/series> <http://ex.org/Franchise> .
";

    #[test]
    fn empty_input() {
        let kg = parse_ntriples_str("", &default_label_predicates()).unwrap();
        assert_eq!((kg.len(), kg.predicates().len()), (0, 0));
    }

    #[test]
    fn three_line_fixture() {
        let kg = parse_ntriples_str(FIXTURE, &default_label_predicates()).unwrap();
        assert_eq!(kg.len(), 3);
        assert_eq!(kg.predicates().len(), 2);
        assert_eq!(kg.all_stats().count(), 2);
        let series = kg.node_id_str("http://ex.org/series").unwrap();
        assert_eq!(kg.stats(series).unwrap().triple_count, 2);
        let bel = kg.node_id_str("http://ex.org/Behind_Enemy_Lines").unwrap();
        assert_eq!(kg.labels(bel), ["Behind Enemy Lines"]);
    }

    #[test]
    fn explicit_label_replaces_fallback() {
        let text = "<http://ex.org/A_b> <http://www.w3.org/2000/01/rdf-schema#label> \"Alpha\"@en .\n";
        let kg = parse_ntriples_str(text, &default_label_predicates()).unwrap();
        let a = kg.node_id_str("http://ex.org/A_b").unwrap();
        assert_eq!(kg.labels(a), ["Alpha"]);
    }

    #[test]
    fn parse_error_carries_line() {
        let text = "<http://a/s> <http://a/p> <http://a/o> .\n<http://a/s> <http://a/p> .\n";
        match parse_ntriples_str(text, &[]) {
            Err(IngestError::Parse { line, offset, .. }) => {
                assert_eq!(line, 2);
                assert!(offset >= 40);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn turtle_prefixes_and_lists() {
        let text = "@prefix ex: <http://ex.org/> .\nex:a ex:p ex:b , ex:c ; ex:q \"x\" .\n";
        let kg = load_reader(text.as_bytes(), RdfFormat::Turtle, &[], "t.ttl").unwrap();
        assert_eq!(kg.len(), 3);
    }

    #[test]
    fn duplicates_collapse_and_blank_nodes_are_opaque() {
        let text = "_:b1 <http://a/p> \"v\" .\n_:b1 <http://a/p> \"v\" .\n";
        let kg = parse_ntriples_str(text, &[]).unwrap();
        assert_eq!(kg.len(), 1);
        assert!(kg.node_id_str("_:b1").is_some());
    }
}
