use proptest::prelude::*;

use super::*;
use crate::ingestion::parse_ntriples_str;
use crate::model::{default_label_predicates, Term};

fn iri(s: &str) -> Iri {
    Iri::new(s).unwrap()
}

fn pair(l: &str, r: &str, score: f64) -> ScoredPair {
    ScoredPair { left: iri(l), right: iri(r), score }
}

fn gold(pairs: &[(&str, &str)]) -> GoldStandard {
    GoldStandard::from_entity_pairs(pairs.iter().map(|(l, r)| (iri(l), iri(r))))
}

#[test]
fn hit_at_k_counts() {
    let g = gold(&[("a:1", "b:1"), ("a:2", "b:2"), ("a:3", "b:3")]);
    let mut preds = Vec::new();
    // gold partners at ranks 1, 3 and 12
    for (src, rank) in [("a:1", 1), ("a:2", 3), ("a:3", 12)] {
        let n = src.trim_start_matches("a:");
        for i in 1..=15 {
            let target = if i == rank { format!("b:{n}") } else { format!("b:x{i:02}") };
            preds.push(pair(src, &target, 1.0 - i as f64 / 100.0));
        }
    }
    let ranked = rank_predictions(&preds);
    assert!((hit_at_k(&ranked, &g, 10).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    assert!((hit_at_k(&ranked, &g, 1).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    assert_eq!(hit_at_k(&ranked, &g, 12).unwrap(), 1.0);
    assert_eq!(hit_at_k(&ranked, &g, 0), Err(EvalError::ZeroK));
}

#[test]
fn fifth_place_hits_at_ten_not_one() {
    let g = gold(&[("a:1", "b:1")]);
    let preds: Vec<_> = (1..=6)
        .map(|i| pair("a:1", if i == 5 { "b:1" } else { ["b:q", "b:r", "b:s", "b:t", "", "b:u"][i - 1] }, 1.0 - i as f64 * 0.1))
        .collect();
    let ranked = rank_predictions(&preds);
    assert_eq!(hit_at_k(&ranked, &g, 10).unwrap(), 1.0);
    assert_eq!(hit_at_k(&ranked, &g, 1).unwrap(), 0.0);
}

#[test]
fn confusion_counts_reproduce_published_scores() {
    let r = EvalReport::from_counts(1021, 16, 110, 0.0);
    assert_eq!(format!("{:.2} {:.2} {:.2}", r.precision, r.recall, r.f_measure), "0.98 0.90 0.94");
    assert!(r.to_text().contains("P 0.98  R 0.90  F 0.94"));
}

#[test]
fn empty_predictions_flag_precision() {
    let g = gold(&[("a:1", "b:1")]);
    let r = prf_one_to_one(&[], &g, 0.5);
    assert!(r.precision_undefined);
    assert_eq!((r.precision, r.recall, r.fn_), (0.0, 0.0, 1));
}

#[test]
fn perfect_predictions() {
    let g = gold(&[("a:1", "b:1"), ("a:2", "b:2")]);
    let r = prf_one_to_one(&[pair("a:1", "b:1", 0.8), pair("a:2", "b:2", 0.7)], &g, 0.5);
    assert_eq!((r.precision, r.recall, r.f_measure), (1.0, 1.0, 1.0));
}

#[test]
fn open_world_and_ties() {
    let g = gold(&[("a:1", "b:1"), ("a:2", "b:2")]);
    let preds = [
        pair("a:1", "b:1", 0.9),
        pair("a:1", "b:9", 0.9),
        pair("a:1", "b:8", 0.5),
        pair("a:7", "b:7", 0.9),
        pair("a:6", "b:2", 0.95),
    ];
    let r = prf_one_to_one(&preds, &g, 0.0);
    // tie keeps b:9 (fp); a:7-b:7 touches no gold entity; a:6-b:2 is fp
    assert_eq!((r.tp, r.fp, r.fn_), (1, 2, 1));
}

#[test]
fn sweep_single_prediction() {
    let g = gold(&[("a:1", "b:1")]);
    let r = threshold_sweep(&[pair("a:1", "b:1", 0.9)], &g, DEFAULT_SWEEP_STEP).unwrap();
    assert!(r.threshold <= 0.9);
    assert_eq!(r.f_measure, 1.0);
    assert_eq!(r.threshold, 0.0);
}

#[test]
fn sweep_empty_gold_is_invalid() {
    let r = threshold_sweep(&[pair("a:1", "b:1", 0.9)], &GoldStandard::default(), 0.1).unwrap();
    assert!(r.invalid);
    assert!(matches!(threshold_sweep(&[], &GoldStandard::default(), 0.0), Err(EvalError::Step(_))));
    assert!(matches!(threshold_sweep(&[], &GoldStandard::default(), 0.6), Err(EvalError::Step(_))));
}

#[test]
fn sweep_finds_known_optimum() {
    // correct pairs score above 0.6, wrong-partner pairs score below
    let g = gold(&[("a:1", "b:1"), ("a:2", "b:2"), ("a:3", "b:3"), ("a:4", "b:4")]);
    let preds = [
        pair("a:1", "b:1", 0.91),
        pair("a:2", "b:2", 0.75),
        pair("a:3", "b:3", 0.62),
        pair("a:4", "b:x", 0.58),
        pair("a:5", "b:4", 0.40),
    ];
    let r = threshold_sweep(&preds, &g, 0.01).unwrap();
    let grid = sweep_grid(0.01).unwrap();
    let direct = grid
        .iter()
        .map(|&t| (t, prf_one_to_one(&preds, &g, t).f_measure))
        .fold((f64::NAN, -1.0), |best, (t, f)| if f > best.1 { (t, f) } else { best });
    assert_eq!((r.threshold, r.f_measure), direct);
    assert!((r.threshold - 0.59).abs() < 1e-12);
}

#[test]
fn grid_covers_unit_interval() {
    let g = sweep_grid(0.01).unwrap();
    assert_eq!(g.len(), 101);
    assert_eq!((g[0], g[100]), (0.0, 1.0));
    assert_eq!(sweep_grid(0.3).unwrap(), vec![0.0, 0.3, 0.6, 0.8999999999999999, 1.0]);
}

fn lit(triple: &str) -> Triple {
    let kg = parse_ntriples_str(triple, &default_label_predicates()).unwrap();
    let id = kg.triple_ids().next().unwrap();
    kg.triple(id)
}

#[test]
fn published_triple_examples() {
    let ma = "http://memory-alpha.org/resource/";
    let mb = "http://memory-beta.org/resource/";
    let g = gold(&[(&format!("{ma}Human"), &format!("{mb}Human"))]);
    let row = |o1: &str, o2: &str| {
        let a = lit(&format!("<{ma}S> <{ma}p> {o1} .\n"));
        let b = lit(&format!("<{mb}S> <{mb}p> {o2} .\n"));
        auto_label_triple_pair(LabeledTriple::new(&a), LabeledTriple::new(&b), &g)
    };
    assert_eq!(row("\"288\"", "\"269\""), TripleLabel::Compatible);
    assert_eq!(row("\"48\"", "\"4810\""), TripleLabel::Divergent);
    assert_eq!(row(&format!("<{ma}Human>"), "\"3\""), TripleLabel::Divergent);
    assert_eq!(row(&format!("<{ma}Human>"), &format!("<{mb}Human>")), TripleLabel::Compatible);
    assert_eq!(row(&format!("<{ma}Augment>"), &format!("<{mb}Human>")), TripleLabel::Divergent);
}

#[test]
fn other_label_rules() {
    let g = gold(&[("a:x", "b:x")]);
    let label = |o1: &str, o2: &str| {
        auto_label_triple_pair(
            LabeledTriple::new(&lit(&format!("<a:s> <a:p> {o1} .\n"))),
            LabeledTriple::new(&lit(&format!("<b:s> <b:p> {o2} .\n"))),
            &g,
        )
    };
    assert_eq!(label("\"55\"", "\"64\""), TripleLabel::Compatible);
    assert_eq!(label("\"55\"", "\"65\""), TripleLabel::Divergent);
    assert_eq!(label("\"Fair\"", "\"fair\""), TripleLabel::Compatible);
    assert_eq!(label("\"pale\"", "\"white\""), TripleLabel::NeedsReview);
    assert_eq!(
        label("\"2001-02-03\"^^<http://www.w3.org/2001/XMLSchema#date>", "\"2001-02-03T10:00:00Z\"^^<http://www.w3.org/2001/XMLSchema#dateTime>"),
        TripleLabel::Compatible
    );
    assert_eq!(label("<a:q>", "<b:q>"), TripleLabel::NeedsReview);
    let t1 = lit("<a:s> <a:p> <a:q> .\n");
    let t2 = lit("<b:s> <b:p> \"Vulcan\" .\n");
    let labels = vec!["vulcan".to_string()];
    assert_eq!(
        auto_label_triple_pair(LabeledTriple::with_labels(&t1, &labels), LabeledTriple::new(&t2), &g),
        TripleLabel::Compatible
    );
}

#[test]
fn triple_dataset_enumeration() {
    let labels = default_label_predicates();
    let g1 = parse_ntriples_str(
        "<a:x> <a:p> \"1\" .\n<a:y> <a:q> \"2\" .\n<a:x> <a:r> \"3\" .\n<a:y> <a:r> \"4\" .\n<a:z> <a:r> \"5\" .\n<a:z> <a:r> \"6\" .\n",
        &labels,
    )
    .unwrap();
    let g2 = parse_ntriples_str("<b:x> <b:p> \"1\" .\n<b:x> <b:r> \"3\" .\n<b:y> <b:r> \"9\" .\n", &labels).unwrap();
    let mut g = gold(&[("a:x", "b:x"), ("a:y", "b:y")]);
    g.predicate_pairs.insert((iri("a:p"), iri("b:p")));
    let rows = build_triple_dataset(&g1, &g2, &g, DEFAULT_FUNCTIONALITY_MIN);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].label, TripleLabel::Compatible);
    // a:r has functionality 3/4 on the left
    g.predicate_pairs.insert((iri("a:r"), iri("b:r")));
    assert_eq!(build_triple_dataset(&g1, &g2, &g, DEFAULT_FUNCTIONALITY_MIN).len(), 1);
    assert_eq!(build_triple_dataset(&g1, &g2, &g, 0.7).len(), 3);
    let mut buf = Vec::new();
    write_triple_candidates(&mut buf, &rows).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), format!("{TRIPLE_GOLD_HEADER}\n<a:x>\t<a:p>\t\"1\"\t<b:x>\t<b:p>\t\"1\"\tcompatible\n"));
}

/// Direct restatement of the counting rules over plain vectors.
fn naive_prf(preds: &[(u8, u8, f64)], gold: &[(u8, u8)], t: f64) -> (usize, usize, usize) {
    let mut kept = Vec::new();
    for &(l, _, _) in preds {
        let max = preds.iter().filter(|p| p.0 == l && p.2 >= t).map(|p| p.2).fold(f64::NAN, f64::max);
        for &(l2, r2, s2) in preds {
            if l2 == l && s2 >= t && s2 == max && !kept.contains(&(l2, r2)) {
                kept.push((l2, r2));
            }
        }
    }
    let tp = kept.iter().filter(|p| gold.contains(p)).count();
    let fp = kept
        .iter()
        .filter(|p| !gold.contains(p) && gold.iter().any(|g| g.0 == p.0 || g.1 == p.1))
        .count();
    let fn_ = gold.iter().filter(|g| !kept.contains(g)).count();
    (tp, fp, fn_)
}

fn to_iri_pairs(preds: &[(u8, u8, f64)]) -> Vec<ScoredPair> {
    preds.iter().map(|&(l, r, s)| pair(&format!("a:{l}"), &format!("b:{r}"), s)).collect()
}

proptest! {
    #[test]
    fn prf_matches_naive_counts(
        raw in prop::collection::vec((0u8..12, 0u8..12, 0u8..5), 0..60),
        gold_raw in prop::collection::btree_set((0u8..12, 0u8..12), 0..40),
        t in 0u8..5,
    ) {
        let mut seen = std::collections::HashSet::new();
        let preds: Vec<(u8, u8, f64)> = raw
            .into_iter()
            .filter(|p| seen.insert((p.0, p.1)))
            .map(|(l, r, s)| (l, r, s as f64 / 4.0))
            .collect();
        let gold_pairs: Vec<(u8, u8)> = gold_raw.into_iter().collect();
        let g = GoldStandard::from_entity_pairs(gold_pairs.iter().map(|(l, r)| (iri(&format!("a:{l}")), iri(&format!("b:{r}")))));
        let t = t as f64 / 4.0;
        let r = prf_one_to_one(&to_iri_pairs(&preds), &g, t);
        prop_assert_eq!((r.tp, r.fp, r.fn_), naive_prf(&preds, &gold_pairs, t));
        prop_assert_eq!(r.tp + r.fn_, gold_pairs.len());
    }

    #[test]
    fn hit_at_k_is_monotone(
        raw in prop::collection::vec((0u8..8, 0u8..8, 0u8..10), 1..40),
        gold_raw in prop::collection::btree_set((0u8..8, 0u8..8), 1..10),
    ) {
        let preds: Vec<_> = raw.into_iter().map(|(l, r, s)| (l, r, s as f64 / 10.0)).collect();
        let g = GoldStandard::from_entity_pairs(gold_raw.iter().map(|(l, r)| (iri(&format!("a:{l}")), iri(&format!("b:{r}")))));
        let ranked = rank_predictions(&to_iri_pairs(&preds));
        let mut last = 0.0;
        for k in 1..10 {
            let h = hit_at_k(&ranked, &g, k).unwrap();
            prop_assert!(h >= last);
            last = h;
        }
    }

    #[test]
    fn sweep_dominates_endpoints(
        raw in prop::collection::vec((0u8..8, 0u8..8, 0u8..=100), 0..40),
        gold_raw in prop::collection::btree_set((0u8..8, 0u8..8), 1..10),
    ) {
        let preds = to_iri_pairs(&raw.into_iter().map(|(l, r, s)| (l, r, s as f64 / 100.0)).collect::<Vec<_>>());
        let g = GoldStandard::from_entity_pairs(gold_raw.iter().map(|(l, r)| (iri(&format!("a:{l}")), iri(&format!("b:{r}")))));
        let best = threshold_sweep(&preds, &g, 0.05).unwrap();
        prop_assert!(best.f_measure >= prf_one_to_one(&preds, &g, 0.0).f_measure);
        prop_assert!(best.f_measure >= prf_one_to_one(&preds, &g, 1.0).f_measure);
    }

    #[test]
    fn literal_rules_are_symmetric(a in -1e6f64..1e6, b in -1e6f64..1e6, s in "[a-zA-Z ]{0,8}", u in "[a-zA-Z ]{0,8}") {
        let g = GoldStandard::default();
        let mk = |o: Term| Triple::new(iri("a:s"), iri("a:p"), o);
        let check = |x: Term, y: Term| {
            let (tx, ty) = (mk(x), mk(y));
            auto_label_triple_pair(LabeledTriple::new(&tx), LabeledTriple::new(&ty), &g)
                == auto_label_triple_pair(LabeledTriple::new(&ty), LabeledTriple::new(&tx), &g)
        };
        let num = |v: f64| Term::literal(&format!("{v}"), None);
        prop_assert!(check(num(a), num(b)));
        prop_assert!(check(Term::literal(&s, None), Term::literal(&u, None)));
        prop_assert!(check(num(a), Term::literal(&s, None)));
    }
}
