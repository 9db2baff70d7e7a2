//! Browser bindings for a few matcher primitives: triple scoring, label
//! confidence and object similarity.

use ftm_core::embedding::LocalTrigramProvider;
use ftm_core::label::label_confidence as core_label_confidence;
use ftm_core::matcher::{entity_similarity_from_triples, triple_divergence, triple_similarity};
use ftm_core::model::classify_literal;
use ftm_core::similarity::{object_similarity_row, Object};
use ftm_core::Iri;
use wasm_bindgen::prelude::*;

fn to_js<E: std::fmt::Display>(e: E) -> JsError {
    JsError::new(&e.to_string())
}

/// `[compat, divergence]` for one triple pair.
#[wasm_bindgen]
pub fn triple_score(
    ent: f64,
    pred: f64,
    fun1: f64,
    fun2: f64,
    inv1: f64,
    inv2: f64,
    obj: f64,
) -> Result<Vec<f64>, JsError> {
    let compat = triple_similarity(ent, pred, fun1, fun2, inv1, inv2, obj).map_err(to_js)?;
    let divergence = triple_divergence(ent, pred, fun1, fun2, inv1, inv2, obj).map_err(to_js)?;
    Ok(vec![compat, divergence])
}

/// Entity similarity after 1..=n triples that each score `per_triple`.
#[wasm_bindgen]
pub fn entity_curve(per_triple: f64, n: u32) -> Vec<f64> {
    (1..=n as usize).map(|k| entity_similarity_from_triples(std::iter::repeat_n(per_triple, k))).collect()
}

/// Label confidence of two elements, labels separated by newlines.
/// Returns `[confidence, tier]` or an empty array below the floor.
#[wasm_bindgen]
pub fn label_confidence(left_iri: &str, left_labels: &str, right_iri: &str, right_labels: &str) -> Result<Vec<JsValue>, JsError> {
    let split = |s: &str| s.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect::<Vec<_>>();
    let (l, r) = (Iri::new(left_iri).map_err(to_js)?, Iri::new(right_iri).map_err(to_js)?);
    let embedder = LocalTrigramProvider::new(256, 0);
    Ok(core_label_confidence(&l, &split(left_labels), &r, &split(right_labels), Some(&embedder), true)
        .map(|m| vec![JsValue::from_f64(m.confidence), JsValue::from_str(m.tier.as_str())])
        .unwrap_or_default())
}

/// `[row, similarity]` for two literal values.
#[wasm_bindgen]
pub fn object_similarity(left: &str, right: &str) -> Vec<f64> {
    let (a, b) = (classify_literal(left, None), classify_literal(right, None));
    let no_scores = |_, _| None;
    let (row, sim) = object_similarity_row(&Object::from_literal(&a, None), &Object::from_literal(&b, None), &no_scores);
    vec![f64::from(row), sim]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_grows() {
        let c = entity_curve(0.07, 10);
        assert_eq!(c.len(), 10);
        assert!((c[1] - 0.1351).abs() < 1e-4);
        assert!((c[9] - 0.516).abs() < 1e-3);
        assert!(c.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn numbers_compare_by_value() {
        let r = object_similarity("288", "269");
        assert_eq!(r[0], 6.0);
        assert!(r[1] > object_similarity("48", "4810")[1]);
    }
}
