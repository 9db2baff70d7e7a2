use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use ftm_core::embedding::EmbeddingProvider;
use ftm_core::eval::{
    build_triple_dataset, hit_at_k, load_gold, prf_one_to_one, rank_predictions, threshold_sweep,
    write_triple_candidates, ScoredPair,
};
use ftm_core::ingestion::{
    common_literals, fetch_endpoint, load_graph, snapshot_load, snapshot_save, GraphSource, RdfFormat, SNAPSHOT_MAGIC,
};
use ftm_core::label::build_label_mappings;
use ftm_core::matcher::{
    compute_divergences, read_entity_mappings, run_pipeline, write_entity_mappings, write_triple_mappings,
    Classification, EntityScore, MatchContext, MatchState, TripleMapping,
};
use ftm_core::model::KnowledgeGraph;
use serde_json::json;

use crate::config::RunConfig;
use crate::error::{Category, CliError};
use crate::EvalArgs;

fn is_snapshot(path: &Path) -> bool {
    let mut magic = [0u8; 8];
    File::open(path).and_then(|mut f| f.read_exact(&mut magic)).is_ok() && &magic == SNAPSHOT_MAGIC
}

pub fn load(cfg: &RunConfig, location: &str) -> Result<KnowledgeGraph, CliError> {
    let remote = location.starts_with("http://") || location.starts_with("https://");
    if cfg.endpoint.force || remote {
        return fetch_endpoint(&cfg.endpoint.to_config(location), &cfg.label_predicates).map_err(CliError::ingest);
    }
    let path = PathBuf::from(location);
    if !path.exists() {
        return Err(CliError::ingest(format!("{location}: no such file")));
    }
    if is_snapshot(&path) {
        return snapshot_load(&path).map_err(|e| CliError::ingest(format!("{location}: {e}")));
    }
    let format = match cfg.format.as_deref() {
        Some("ntriples" | "nt") => RdfFormat::NTriples,
        Some("turtle" | "ttl") => RdfFormat::Turtle,
        _ => RdfFormat::from_path(&path)
            .ok_or_else(|| CliError::ingest(format!("{location}: unknown RDF format, pass --format")))?,
    };
    load_graph(&GraphSource::File { path, format }, &cfg.label_predicates).map_err(CliError::ingest)
}

fn load_pair(cfg: &RunConfig) -> Result<(KnowledgeGraph, KnowledgeGraph), CliError> {
    let source = cfg.source.as_deref().ok_or_else(|| CliError::config("missing --source"))?;
    let target = cfg.target.as_deref().ok_or_else(|| CliError::config("missing --target"))?;
    let g1 = load(cfg, source)?;
    let g2 = load(cfg, target)?;
    log::info!("loaded {} and {} triples", g1.len(), g2.len());
    Ok((g1, g2))
}

fn provider(cfg: &RunConfig) -> Result<Box<dyn EmbeddingProvider>, CliError> {
    cfg.provider().build().map_err(|e| CliError::new(Category::Provider, e.to_string()))
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    File::create(&path).map(BufWriter::new).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

fn finish(mut w: BufWriter<File>, name: &str) -> Result<(), CliError> {
    w.flush().map_err(|e| CliError::io(format!("{name}: {e}")))
}

fn ms(t: Instant) -> u64 {
    t.elapsed().as_millis() as u64
}

fn class_counts(rows: &[TripleMapping]) -> serde_json::Value {
    let count = |c: Classification| rows.iter().filter(|m| m.classification == c).count();
    json!({
        "compatible": count(Classification::Compatible),
        "divergent": count(Classification::Divergent),
        "undecided": count(Classification::Undecided),
    })
}

fn graph_summary(kg: &KnowledgeGraph) -> serde_json::Value {
    json!({ "triples": kg.len(), "entities": kg.entities().len(), "predicates": kg.predicates().len() })
}

pub fn cmd_match(cfg: &RunConfig) -> Result<(), CliError> {
    let start = Instant::now();
    let (g1, g2) = load_pair(cfg)?;
    let load_ms = ms(start);
    let embedder = provider(cfg)?;

    let t = Instant::now();
    let labels = build_label_mappings(&g1, &g2, Some(embedder.as_ref()), &cfg.label);
    let label_ms = ms(t);

    let t = Instant::now();
    let common = common_literals(&g1, &g2);
    let ctx = MatchContext::new(&g1, &g2, &labels.predicates, cfg.match_config());
    let state = run_pipeline(&ctx, &labels.entities, &common, Some(embedder.as_ref()));
    let pipeline_ms = ms(t);

    let t = Instant::now();
    let entities = state.entity_mappings(&g1, &g2);
    let triples = state.triple_mappings(&cfg.thresholds);
    let mut w = create(&cfg.output_dir, "entity_mappings.tsv")?;
    write_entity_mappings(&mut w, &entities).map_err(CliError::io)?;
    finish(w, "entity_mappings.tsv")?;
    let mut w = create(&cfg.output_dir, "triple_mappings.tsv")?;
    write_triple_mappings(&mut w, &g1, &g2, &triples).map_err(CliError::io)?;
    finish(w, "triple_mappings.tsv")?;
    let write_ms = ms(t);

    let accepted = entities.iter().filter(|m| m.combined >= cfg.thresholds.entity).count();
    let mut warnings = labels.warnings.clone();
    warnings.extend(state.warnings.iter().cloned());
    let report = json!({
        "source": cfg.source,
        "target": cfg.target,
        "left": graph_summary(&g1),
        "right": graph_summary(&g2),
        "embedder": embedder.model_name(),
        "label_mappings": { "entities": labels.entities.len(), "predicates": labels.predicates.len() },
        "common_literals": common.len(),
        "iterations": state.history,
        "stop_reason": state.stop_reason,
        "entity_mappings": entities.len(),
        "entity_mappings_above_threshold": accepted,
        "triple_mappings": triples.len(),
        "triple_classes": class_counts(&triples),
        "timings_ms": { "load": load_ms, "labels": label_ms, "pipeline": pipeline_ms, "write": write_ms, "total": ms(start) },
        "warnings": warnings,
        "config": cfg,
    });
    let mut w = create(&cfg.output_dir, "run_report.json")?;
    serde_json::to_writer_pretty(&mut w, &report).map_err(CliError::io)?;
    writeln!(w).map_err(CliError::io)?;
    finish(w, "run_report.json")?;
    println!(
        "{} entity pairs ({} ≥ {:.2}), {} triple pairs, {} iteration(s) -> {}",
        entities.len(),
        accepted,
        cfg.thresholds.entity,
        triples.len(),
        state.history.len(),
        cfg.output_dir.display()
    );
    Ok(())
}

pub fn cmd_diverge(cfg: &RunConfig, mappings: &Path) -> Result<(), CliError> {
    let file = File::open(mappings).map_err(|e| CliError::ingest(format!("{}: {e}", mappings.display())))?;
    let records = read_entity_mappings(BufReader::new(file))
        .map_err(|e| CliError::ingest(format!("{}: {e}", mappings.display())))?;
    let (g1, g2) = load_pair(cfg)?;
    let embedder = provider(cfg)?;
    let labels = build_label_mappings(&g1, &g2, Some(embedder.as_ref()), &cfg.label);
    let mut scores = BTreeMap::new();
    let mut unknown = 0;
    for r in &records {
        match (g1.node_id(&r.left), g2.node_id(&r.right)) {
            (Some(l), Some(rr)) => {
                scores.insert(
                    (l, rr),
                    EntityScore { label: r.label_confidence, triple: r.triple_confidence, combined: r.combined },
                );
            }
            _ => unknown += 1,
        }
    }
    if unknown > 0 {
        log::warn!("{unknown} mapping(s) name entities absent from the graphs");
    }
    let ctx = MatchContext::new(&g1, &g2, &labels.predicates, cfg.match_config());
    let state = MatchState::from_entity_scores(scores);
    let rows = compute_divergences(&ctx, &state);
    let mut w = create(&cfg.output_dir, "divergences.tsv")?;
    write_triple_mappings(&mut w, &g1, &g2, &rows).map_err(CliError::io)?;
    finish(w, "divergences.tsv")?;
    let divergent = rows.iter().filter(|m| m.classification == Classification::Divergent).count();
    println!("{} triple pairs, {divergent} divergent -> {}", rows.len(), cfg.output_dir.display());
    Ok(())
}

pub fn cmd_eval(args: &EvalArgs) -> Result<(), CliError> {
    let cfg = match &args.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    if args.k.contains(&0) {
        return Err(CliError::config("k values must be at least 1"));
    }
    let gold = load_gold(&args.gold).map_err(|e| CliError::ingest(format!("{}: {e}", args.gold.display())))?;
    if gold.entity_pairs.is_empty() {
        return Err(CliError::ingest(format!("empty gold standard: {}", args.gold.display())));
    }
    let file =
        File::open(&args.predictions).map_err(|e| CliError::ingest(format!("{}: {e}", args.predictions.display())))?;
    let predicted: Vec<ScoredPair> = read_entity_mappings(BufReader::new(file))
        .map_err(|e| CliError::ingest(format!("{}: {e}", args.predictions.display())))?
        .into_iter()
        .map(|r| ScoredPair { left: r.left, right: r.right, score: r.combined })
        .collect();
    let mut report = if args.sweep {
        threshold_sweep(&predicted, &gold, args.step).map_err(|e| CliError::config(e.to_string()))?
    } else {
        let threshold = args.threshold.unwrap_or(cfg.thresholds.entity);
        if !(0.0..=1.0).contains(&threshold) {
            return Err(CliError::config(format!("threshold must be in [0, 1], got {threshold}")));
        }
        prf_one_to_one(&predicted, &gold, threshold)
    };
    let ranked = rank_predictions(&predicted);
    let mut ks = args.k.clone();
    ks.sort_unstable();
    ks.dedup();
    for k in ks {
        report.hit_at.insert(k, hit_at_k(&ranked, &gold, k).map_err(|e| CliError::config(e.to_string()))?);
    }
    print!("{}", report.to_text());
    if let Some(dir) = &args.output_dir {
        let mut w = create(dir, "eval_report.json")?;
        writeln!(w, "{}", report.to_json()).map_err(CliError::io)?;
        finish(w, "eval_report.json")?;
    }
    Ok(())
}

pub fn cmd_stats(cfg: &RunConfig, source: &str, out: &mut dyn Write) -> Result<(), CliError> {
    let kg = load(cfg, source)?;
    let mut stats: Vec<_> = kg.all_stats().collect();
    stats.sort_by(|a, b| b.triple_count.cmp(&a.triple_count).then_with(|| a.predicate.cmp(&b.predicate)));
    let write = || -> std::io::Result<()> {
        writeln!(out, "predicate\ttriples\tfunctionality\tinverse_functionality\tunique_ratio")?;
        for s in stats {
            writeln!(
                out,
                "{}\t{}\t{:.6}\t{:.6}\t{:.6}",
                s.predicate, s.triple_count, s.functionality, s.inverse_functionality, s.unique_ratio
            )?;
        }
        Ok(())
    };
    write().map_err(CliError::io)
}

pub fn cmd_build_triple_gold(
    cfg: &RunConfig,
    gold_path: &Path,
    predicate_gold: Option<&Path>,
    fun_min: f64,
) -> Result<(), CliError> {
    let read = |p: &Path| load_gold(p).map_err(|e| CliError::ingest(format!("{}: {e}", p.display())));
    let mut gold = read(gold_path)?;
    let (g1, g2) = load_pair(cfg)?;
    match predicate_gold {
        Some(p) => gold.predicate_pairs.extend(read(p)?.entity_pairs),
        None => {
            let predicates: HashSet<_> = g1.predicates().iter().copied().collect();
            gold.split_predicates(|iri| g1.node_id(iri).is_some_and(|id| predicates.contains(&id)));
        }
    }
    if gold.entity_pairs.is_empty() {
        return Err(CliError::ingest(format!("empty gold standard: {}", gold_path.display())));
    }
    let rows = build_triple_dataset(&g1, &g2, &gold, fun_min);
    let mut w = create(&cfg.output_dir, "triple_gold.tsv")?;
    write_triple_candidates(&mut w, &rows).map_err(CliError::io)?;
    finish(w, "triple_gold.tsv")?;
    println!("{} candidate triple pairs -> {}", rows.len(), cfg.output_dir.display());
    Ok(())
}

pub fn cmd_snapshot(cfg: &RunConfig, source: &str, out: &Path) -> Result<(), CliError> {
    let kg = load(cfg, source)?;
    snapshot_save(&kg, out).map_err(|e| CliError::io(format!("{}: {e}", out.display())))?;
    println!("{} triples -> {}", kg.len(), out.display());
    Ok(())
}
