//! Synthetic graph generators and an independent phase evaluator.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use ftm_core::ingestion::{parse_ntriples_str, CommonLiteralSet};
use ftm_core::label::{LabelMapping, LabelTier};
use ftm_core::matcher::{MatchContext, MatchState, PairKey, TriplePairKey};
use ftm_core::model::{default_label_predicates, Iri, KnowledgeGraph, NodeId, ObjectRef};
use ftm_core::similarity::{object_similarity, Object};
use rand::rngs::StdRng;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};

pub const LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";
const XSD: &str = "http://www.w3.org/2001/XMLSchema#";

pub fn iri(s: &str) -> Iri {
    Iri::new(s).unwrap()
}

pub fn parse(nt: &str) -> KnowledgeGraph {
    parse_ntriples_str(nt, &default_label_predicates()).unwrap()
}

/// Two graphs with a known alignment.
pub struct Planted {
    pub left_nt: String,
    pub right_nt: String,
    pub left: KnowledgeGraph,
    pub right: KnowledgeGraph,
    pub pairs: Vec<(Iri, Iri)>,
    pub perturbed_labels: usize,
    pub unaligned_left: usize,
    pub unaligned_right: usize,
}

const FIRST: &[&str] = &[
    "james", "mary", "robert", "patricia", "john", "jennifer", "michael", "linda", "david", "elizabeth", "william",
    "barbara", "richard", "susan", "joseph", "jessica", "thomas", "sarah", "charles", "karen", "daniel", "nancy",
    "matthew", "lisa", "anthony", "betty", "mark", "sandra", "donald", "ashley", "steven", "kimberly", "paul",
    "emily", "andrew", "donna", "joshua", "michelle", "kenneth", "carol",
];
const SYLLABLES: &[&str] = &[
    "ka", "ren", "dol", "mir", "tas", "vel", "qui", "bor", "nel", "sab", "tor", "ul", "fen", "gar", "hol", "ist",
    "jor", "lum", "pra", "zed", "wyn", "cal", "dri", "ost",
];
const EYES: &[&str] = &["brown", "blue", "green", "grey"];

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    c.next().map(|f| f.to_uppercase().chain(c).collect()).unwrap_or_default()
}

fn word(rng: &mut StdRng, syllables: usize) -> String {
    capitalize(&(0..syllables).map(|_| *SYLLABLES.choose(rng).unwrap()).collect::<String>())
}

fn unique_names(rng: &mut StdRng, n: usize, make: impl Fn(&mut StdRng) -> String) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    while out.len() < n {
        let name = make(rng);
        if seen.insert(name.to_lowercase()) {
            out.push(name);
        }
    }
    out
}

/// Swaps the tokens of multi-token labels, otherwise introduces one typo.
fn perturb(rng: &mut StdRng, label: &str) -> String {
    let tokens: Vec<&str> = label.split(' ').collect();
    if tokens.len() > 1 && rng.random_bool(0.5) {
        let mut t = tokens.clone();
        t.reverse();
        return t.join(" ");
    }
    let mut chars: Vec<char> = label.chars().collect();
    let i = rng.random_range(1..chars.len() - 1);
    match rng.random_range(0..3) {
        0 => {
            chars.swap(i, i + 1);
        }
        1 => {
            chars.remove(i);
        }
        _ => chars[i] = *['a', 'e', 'o', 'r', 'n'].choose(rng).unwrap(),
    }
    chars.into_iter().collect()
}

struct Person {
    name: String,
    born: String,
    height: u32,
    eyes: &'static str,
    city: usize,
    org: usize,
    knows: Vec<usize>,
}

/// People, cities and organizations on both sides with `aligned` shared
/// people; a quarter of each side's people have no counterpart and 30% of
/// the right-hand labels are perturbed.
pub fn planted_alignment(seed: u64, aligned: usize) -> Planted {
    let mut rng = StdRng::seed_from_u64(seed);
    let unaligned = aligned / 3;
    let total = aligned + 2 * unaligned;
    let n_cities = 15;
    let n_orgs = 10;
    let names = unique_names(&mut rng, total, |r| {
        format!("{} {}", capitalize(FIRST.choose(r).unwrap()), word(r, 3))
    });
    let cities = unique_names(&mut rng, n_cities, |r| word(r, 3));
    let orgs = unique_names(&mut rng, n_orgs, |r| format!("{} {}", word(r, 2), ["Corp", "Labs", "Group"][r.random_range(0..3)]));
    let people: Vec<Person> = names
        .into_iter()
        .map(|name| Person {
            name,
            born: format!("{}-{:02}-{:02}", rng.random_range(1940..2000), rng.random_range(1..13), rng.random_range(1..29)),
            height: rng.random_range(150..200),
            eyes: EYES.choose(&mut rng).unwrap(),
            city: rng.random_range(0..n_cities),
            org: rng.random_range(0..n_orgs),
            knows: (0..2).map(|_| rng.random_range(0..total)).collect(),
        })
        .collect();
    let populations: Vec<u32> = (0..n_cities).map(|_| rng.random_range(10_000..5_000_000)).collect();
    let founded: Vec<i32> = (0..n_orgs).map(|_| rng.random_range(1850..2020)).collect();

    // left people: 0..aligned+unaligned; right people: 0..aligned and aligned+unaligned..total
    let left_people: Vec<usize> = (0..aligned + unaligned).collect();
    let right_people: Vec<usize> = (0..aligned).chain(aligned + unaligned..total).collect();
    let mut right_ids: Vec<usize> = (0..total + n_cities + n_orgs).collect();
    right_ids.shuffle(&mut rng);
    let rid = |i: usize| format!("http://b/r{:04}", right_ids[i]);
    let lperson = |i: usize| format!("http://a/person/{}", people[i].name.replace(' ', "_"));
    let lcity = |i: usize| format!("http://a/city/{}", cities[i]);
    let lorg = |i: usize| format!("http://a/org/{}", orgs[i].replace(' ', "_"));
    let rperson = |i: usize| rid(i);
    let rcity = |i: usize| rid(total + i);
    let rorg = |i: usize| rid(total + n_cities + i);

    let mut l = String::new();
    let mut r = String::new();
    let lit = |v: &str| format!("\"{v}\"");
    let typed = |v: &str, t: &str| format!("\"{v}\"^^<{XSD}{t}>");
    let emit = |out: &mut String, s: &str, p: &str, o: &str| {
        let _ = writeln!(out, "<{s}> <{p}> {o} .");
    };
    let mut perturbed = 0;
    let mut right_label = |rng: &mut StdRng, label: &str| -> String {
        if rng.random_bool(0.3) {
            perturbed += 1;
            perturb(rng, label)
        } else {
            label.to_string()
        }
    };
    let in_left = |i: usize| i < aligned + unaligned;
    let in_right = |i: usize| i < aligned || i >= aligned + unaligned;

    for &i in &left_people {
        let p = &people[i];
        let s = lperson(i);
        emit(&mut l, &s, LABEL, &lit(&p.name));
        emit(&mut l, &s, "http://a/prop/birthDate", &typed(&p.born, "date"));
        emit(&mut l, &s, "http://a/prop/height", &typed(&p.height.to_string(), "integer"));
        emit(&mut l, &s, "http://a/prop/eyeColor", &lit(p.eyes));
        emit(&mut l, &s, "http://a/prop/livesIn", &format!("<{}>", lcity(p.city)));
        emit(&mut l, &s, "http://a/prop/worksFor", &format!("<{}>", lorg(p.org)));
        for &k in p.knows.iter().filter(|&&k| in_left(k) && k != i) {
            emit(&mut l, &s, "http://a/prop/knows", &format!("<{}>", lperson(k)));
        }
    }
    for &i in &right_people {
        let p = &people[i];
        let s = rperson(i);
        let label = right_label(&mut rng, &p.name);
        emit(&mut r, &s, LABEL, &lit(&label));
        if rng.random_bool(0.9) {
            emit(&mut r, &s, "http://b/ont/birth_date", &typed(&p.born, "date"));
        }
        if rng.random_bool(0.9) {
            let h = if rng.random_bool(0.2) { p.height + 1 } else { p.height };
            emit(&mut r, &s, "http://b/ont/height", &typed(&h.to_string(), "integer"));
        }
        emit(&mut r, &s, "http://b/ont/eye_colour", &lit(p.eyes));
        emit(&mut r, &s, "http://b/ont/lives_in", &format!("<{}>", rcity(p.city)));
        emit(&mut r, &s, "http://b/ont/works_for", &format!("<{}>", rorg(p.org)));
        for &k in p.knows.iter().filter(|&&k| in_right(k) && k != i) {
            emit(&mut r, &s, "http://b/ont/knows", &format!("<{}>", rperson(k)));
        }
    }
    for c in 0..n_cities {
        emit(&mut l, &lcity(c), LABEL, &lit(&cities[c]));
        emit(&mut l, &lcity(c), "http://a/prop/population", &typed(&populations[c].to_string(), "integer"));
        let label = right_label(&mut rng, &cities[c]);
        emit(&mut r, &rcity(c), LABEL, &lit(&label));
        emit(&mut r, &rcity(c), "http://b/ont/population_total", &typed(&populations[c].to_string(), "integer"));
    }
    for o in 0..n_orgs {
        emit(&mut l, &lorg(o), LABEL, &lit(&orgs[o]));
        emit(&mut l, &lorg(o), "http://a/prop/founded", &typed(&founded[o].to_string(), "gYear"));
        let label = right_label(&mut rng, &orgs[o]);
        emit(&mut r, &rorg(o), LABEL, &lit(&label));
        emit(&mut r, &rorg(o), "http://b/ont/founded", &typed(&founded[o].to_string(), "gYear"));
    }

    let mut pairs: Vec<(Iri, Iri)> = (0..aligned).map(|i| (iri(&lperson(i)), iri(&rperson(i)))).collect();
    pairs.extend((0..n_cities).map(|c| (iri(&lcity(c)), iri(&rcity(c)))));
    pairs.extend((0..n_orgs).map(|o| (iri(&lorg(o)), iri(&rorg(o)))));
    let left = parse(&l);
    let right = parse(&r);
    Planted {
        left_nt: l,
        right_nt: r,
        left,
        right,
        pairs,
        perturbed_labels: perturbed,
        unaligned_left: unaligned,
        unaligned_right: unaligned,
    }
}

/// Random small graphs sharing a pool of literal values, plus random label
/// mappings for entities and predicates.
pub struct RandomPair {
    pub left: KnowledgeGraph,
    pub right: KnowledgeGraph,
    pub entity_mappings: Vec<LabelMapping>,
    pub predicate_mappings: Vec<LabelMapping>,
}

fn random_graph(rng: &mut StdRng, ns: &str, triples: usize) -> String {
    let pool = [
        "\"12\"".to_string(),
        "\"12.5\"".to_string(),
        "\"green\"".to_string(),
        "\"Green\"".to_string(),
        "\"north gate\"".to_string(),
        format!("\"1999-01-02\"^^<{XSD}date>"),
        format!("\"2004\"^^<{XSD}gYear>"),
        format!("\"1200\"^^<{XSD}integer>"),
        "\"1,200 units\"".to_string(),
    ];
    let mut out = String::new();
    let mut n = 0;
    while n < triples {
        let s = rng.random_range(0..20);
        let p = rng.random_range(0..6);
        let o = if rng.random_bool(0.45) {
            format!("<http://{ns}/e{}>", rng.random_range(0..20))
        } else {
            pool.choose(rng).unwrap().clone()
        };
        let _ = writeln!(out, "<http://{ns}/e{s}> <http://{ns}/p{p}> {o} .");
        n += 1;
    }
    for e in 0..20 {
        if rng.random_bool(0.7) {
            let _ = writeln!(out, "<http://{ns}/e{e}> <{LABEL}> \"thing {}\" .", rng.random_range(0..8));
        }
    }
    out
}

pub fn random_pair(seed: u64, triples: usize) -> RandomPair {
    let mut rng = StdRng::seed_from_u64(seed);
    let left = parse(&random_graph(&mut rng, "a", triples));
    let right = parse(&random_graph(&mut rng, "b", triples));
    let mapping = |l: String, r: String, c: f64| LabelMapping { left: iri(&l), right: iri(&r), confidence: c, tier: LabelTier::Fuzzy };
    let mut entity_mappings = Vec::new();
    for _ in 0..40 {
        let (a, b) = (rng.random_range(0..20), rng.random_range(0..20));
        // coarse scores so that ties occur
        let c = rng.random_range(2..=9) as f64 / 10.0;
        entity_mappings.push(mapping(format!("http://a/e{a}"), format!("http://b/e{b}"), c));
    }
    let mut predicate_mappings = Vec::new();
    for p in 0..6 {
        for q in 0..6 {
            if rng.random_bool(0.3) {
                predicate_mappings.push(mapping(
                    format!("http://a/p{p}"),
                    format!("http://b/p{q}"),
                    rng.random_range(0.35..1.0),
                ));
            }
        }
    }
    predicate_mappings.push(mapping(LABEL.into(), LABEL.into(), 1.0));
    RandomPair { left, right, entity_mappings, predicate_mappings }
}

/// Per-predicate (distinct subjects / triples, distinct objects / triples)
/// counted from the triples themselves.
pub fn brute_stats(kg: &KnowledgeGraph) -> HashMap<NodeId, (f64, f64)> {
    let mut per: HashMap<NodeId, (BTreeSet<NodeId>, BTreeSet<String>, usize)> = HashMap::new();
    for id in kg.triple_ids() {
        let st = kg.stored(id);
        let e = per.entry(st.predicate).or_default();
        e.0.insert(st.subject);
        e.1.insert(kg.triple(id).object.to_ntriples());
        e.2 += 1;
    }
    per.into_iter().map(|(p, (s, o, n))| (p, (s.len() as f64 / n as f64, o.len() as f64 / n as f64))).collect()
}

fn formula(ent: f64, pred: f64, f1: (f64, f64), f2: (f64, f64), obj: f64) -> f64 {
    1.0 - (1.0 - ent * pred * f1.0 * f2.0 * obj) * (1.0 - ent * pred * f1.1 * f2.1 * obj)
}

fn naive_top_k(state: &MatchState, g2: &KnowledgeGraph, k: usize) -> BTreeMap<PairKey, f64> {
    let mut out = BTreeMap::new();
    let sources: BTreeSet<NodeId> = state.entities.keys().map(|p| p.0).collect();
    for l in sources {
        let mut list: Vec<(NodeId, f64)> =
            state.entities.iter().filter(|(p, _)| p.0 == l).map(|(p, s)| (p.1, s.combined)).collect();
        list.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(g2.iri(a.0).as_str().cmp(g2.iri(b.0).as_str())));
        for (i, &(r, s)) in list.iter().enumerate() {
            if i < k || s == list[k.min(list.len()) - 1].1 {
                out.insert((l, r), s);
            }
        }
    }
    out
}

/// Scores of one round of all three phases, from the full cross product of
/// triples and the formula written out directly.
pub fn naive_round(
    ctx: &MatchContext<'_>,
    state: &MatchState,
    common: &CommonLiteralSet,
) -> BTreeMap<TriplePairKey, f64> {
    let (g1, g2) = (ctx.g1, ctx.g2);
    let s1 = brute_stats(g1);
    let s2 = brute_stats(g2);
    let top = naive_top_k(state, g2, ctx.config.k_top);
    let score = |l: NodeId, r: NodeId| state.entities.get(&(l, r)).map_or(0.5, |e| e.combined);
    let common_values = &common.values;
    let count_with = |kg: &KnowledgeGraph, raw: &str, dt: &Option<Iri>| {
        kg.triple_ids()
            .filter(|&t| matches!(kg.stored(t).object, ObjectRef::Literal(x) if kg.literal(x).raw == raw && &kg.literal(x).datatype_iri == dt))
            .count()
    };
    let mut out = BTreeMap::new();
    for a in g1.triple_ids() {
        let x = g1.stored(a);
        for b in g2.triple_ids() {
            let y = g2.stored(b);
            let Some(pred) = ctx.predicates.get(x.predicate, y.predicate) else { continue };
            let f1 = s1[&x.predicate];
            let f2 = s2[&y.predicate];
            let mut best: Option<f64> = None;
            let mut offer = |v: f64| best = Some(best.map_or(v, |b: f64| b.max(v)));
            if let (ObjectRef::Literal(p), ObjectRef::Literal(q)) = (x.object, y.object) {
                let (p, q) = (g1.literal(p), g2.literal(q));
                let key = (p.raw.clone(), p.datatype_iri.clone());
                if p.raw == q.raw
                    && p.datatype_iri == q.datatype_iri
                    && common_values.contains(&key)
                    && count_with(g1, &p.raw, &p.datatype_iri) <= ctx.config.common_literal_cap
                    && count_with(g2, &q.raw, &q.datatype_iri) <= ctx.config.common_literal_cap
                {
                    offer(formula(score(x.subject, y.subject), pred, f1, f2, 1.0));
                }
            }
            if let (ObjectRef::Entity(o1), ObjectRef::Entity(o2)) = (x.object, y.object) {
                if let Some(&o) = top.get(&(o1, o2)) {
                    offer(formula(score(x.subject, y.subject), pred, f1, f2, o));
                }
            }
            if let Some(&e) = top.get(&(x.subject, y.subject)) {
                let left = match x.object {
                    ObjectRef::Entity(id) => Object::Entity { id, labels: g1.labels(id) },
                    ObjectRef::Literal(l) => Object::from_literal(g1.literal(l), ctx.categoricals1.get(&x.predicate)),
                };
                let right = match y.object {
                    ObjectRef::Entity(id) => Object::Entity { id, labels: g2.labels(id) },
                    ObjectRef::Literal(l) => Object::from_literal(g2.literal(l), ctx.categoricals2.get(&y.predicate)),
                };
                let scores = |l: NodeId, r: NodeId| state.entities.get(&(l, r)).map(|s| s.combined);
                offer(formula(e, pred, f1, f2, object_similarity(&left, &right, &scores)));
            }
            if let Some(v) = best {
                out.insert((a, b), v);
            }
        }
    }
    out
}

/// Hit@1 of the pipeline's top-1 choices over the planted pairs.
pub fn planted_hit_at_1(state: &MatchState, g1: &KnowledgeGraph, g2: &KnowledgeGraph, pairs: &[(Iri, Iri)]) -> f64 {
    let top = state.top1(g2);
    let hits = pairs
        .iter()
        .filter(|(l, r)| g1.node_id(l).and_then(|id| top.get(&id)).is_some_and(|&t| g2.iri(t) == r))
        .count();
    hits as f64 / pairs.len() as f64
}
