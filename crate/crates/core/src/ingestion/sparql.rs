use std::time::Duration;

use serde::Deserialize;

use super::{EndpointConfig, IngestError};
use crate::model::{classify_literal, GraphBuilder, Iri, KnowledgeGraph, Term, Triple};

#[derive(Debug, Deserialize)]
struct ResultsDoc {
    results: Bindings,
}

#[derive(Debug, Deserialize)]
struct Bindings {
    bindings: Vec<Row>,
}

#[derive(Debug, Deserialize)]
struct Row {
    s: Binding,
    p: Binding,
    o: Binding,
}

#[derive(Debug, Deserialize)]
struct Binding {
    #[serde(rename = "type")]
    kind: String,
    value: String,
    datatype: Option<String>,
    #[serde(rename = "xml:lang")]
    lang: Option<String>,
}

fn page_query(cfg: &EndpointConfig, page: usize) -> String {
    let from = cfg.named_graph.as_ref().map(|g| format!("FROM <{g}> ")).unwrap_or_default();
    format!(
        "SELECT ?s ?p ?o {from}WHERE {{ ?s ?p ?o }} ORDER BY ?s ?p ?o LIMIT {} OFFSET {}",
        cfg.page_size,
        page * cfg.page_size
    )
}

fn node(b: &Binding) -> Result<Iri, String> {
    match b.kind.as_str() {
        "uri" => Iri::new(&b.value).map_err(|e| e.to_string()),
        "bnode" => Iri::new(format!("_:{}", b.value)).map_err(|e| e.to_string()),
        other => Err(format!("expected a node, got {other}")),
    }
}

fn term(b: &Binding) -> Result<Term, String> {
    match b.kind.as_str() {
        "literal" | "typed-literal" => {
            let dt = b.datatype.as_deref().map(Iri::new).transpose().map_err(|e| e.to_string())?;
            let mut lit = classify_literal(&b.value, dt.as_ref());
            if let Some(tag) = &b.lang {
                lit = lit.with_language(tag.clone());
            }
            Ok(Term::Literal(lit))
        }
        _ => node(b).map(Term::Entity),
    }
}

struct PageError {
    status: Option<u16>,
    message: String,
    retryable: bool,
}

fn fetch_once(agent: &ureq::Agent, cfg: &EndpointConfig, page: usize) -> Result<Vec<Triple>, PageError> {
    let query = page_query(cfg, page);
    let response = agent
        .get(&cfg.url)
        .query("query", &query)
        .header("Accept", "application/sparql-results+json")
        .call();
    let mut response = match response {
        Ok(r) => r,
        Err(ureq::Error::StatusCode(code)) => {
            return Err(PageError {
                status: Some(code),
                message: format!("HTTP {code}"),
                retryable: code >= 500 || code == 429,
            })
        }
        Err(e) => return Err(PageError { status: None, message: e.to_string(), retryable: true }),
    };
    let doc: ResultsDoc = response
        .body_mut()
        .read_json()
        .map_err(|e| PageError { status: None, message: format!("bad SPARQL JSON: {e}"), retryable: false })?;
    doc.results
        .bindings
        .iter()
        .map(|row| Ok(Triple::new(node(&row.s)?, node(&row.p)?, term(&row.o)?)))
        .collect::<Result<Vec<_>, String>>()
        .map_err(|message| PageError { status: None, message, retryable: false })
}

fn fetch_page(agent: &ureq::Agent, cfg: &EndpointConfig, page: usize) -> Result<Vec<Triple>, IngestError> {
    let attempts = cfg.max_attempts.max(1);
    let mut delay = Duration::from_millis(cfg.backoff_ms);
    let mut last = None;
    for attempt in 1..=attempts {
        match fetch_once(agent, cfg, page) {
            Ok(rows) => return Ok(rows),
            Err(e) => {
                let stop = !e.retryable || attempt == attempts;
                log::warn!("endpoint page {page} attempt {attempt}/{attempts} failed: {}", e.message);
                last = Some((e, attempt));
                if stop {
                    break;
                }
                std::thread::sleep(delay);
                delay *= 2;
            }
        }
    }
    let (e, attempt) = last.expect("at least one attempt");
    Err(IngestError::Endpoint { url: cfg.url.clone(), status: e.status, attempts: attempt, message: e.message })
}

/// Pages through `SELECT ?s ?p ?o` with a stable ORDER BY until a short
/// page arrives. Up to `max_in_flight` pages are requested concurrently and
/// merged in page order.
pub fn fetch_endpoint(cfg: &EndpointConfig, label_predicates: &[Iri]) -> Result<KnowledgeGraph, IngestError> {
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(Duration::from_millis(cfg.timeout_ms)))
        .http_status_as_error(true)
        .build()
        .into();
    let mut builder = GraphBuilder::new(label_predicates);
    let mut next_page = 0;
    loop {
        let window: Vec<usize> = (next_page..next_page + cfg.max_in_flight.max(1)).collect();
        let results: Vec<Result<Vec<Triple>, IngestError>> = std::thread::scope(|scope| {
            let handles: Vec<_> = window
                .iter()
                .map(|&page| {
                    let agent = &agent;
                    scope.spawn(move || fetch_page(agent, cfg, page))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("page fetch panicked")).collect()
        });
        for result in results {
            let rows = result?;
            let short = rows.len() < cfg.page_size;
            for t in rows {
                builder.insert(t);
            }
            if short {
                return Ok(builder.finish());
            }
        }
        next_page += window.len();
    }
}
