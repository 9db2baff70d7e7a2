//! Object similarity across entity, text, number, date and categorical
//! objects.
//!
//! | row | kinds                  | method                                        |
//! |-----|------------------------|-----------------------------------------------|
//! | 1   | entity, entity         | current entity similarity, 0.5 when unscored  |
//! | 2   | entity, text           | best fuzzy score of any label                 |
//! | 3   | entity, categorical    | label resolved to a category, then compared   |
//! | 4   | categorical, categ.    | row 5 in both directions, max                 |
//! | 5   | categorical, text      | closest category value if it is the same one  |
//! | 6   | number, number         | scaled distance                               |
//! | 7   | number, text           | max(numbers extracted, fuzzy)                 |
//! | 8   | number, date           | number as year or epoch, then row 6           |
//! | 9   | date, date             | same calendar date, else row 6 on epochs      |
//! | 10  | date, text             | date extracted from text, then row 9          |
//! | 11  | text, text             | fuzzy                                         |
//!
//! Pairs the table does not list use the label of an entity or the value
//! of a categorical as text: entity-number and categorical-number go to
//! row 7, entity-date and categorical-date to row 10.

mod categorical;
mod numbers;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::label::fuzzy_similarity;
use crate::model::literal::{extract_date, year_like, year_timestamp};
use crate::model::{LiteralKind, LiteralValue, NodeId};

pub use categorical::{
    detect_categoricals, CategoricalDomain, CATEGORY_FUZZY_MIN, DEFAULT_CATEGORICAL_THRESHOLD, DEFAULT_MIN_SUPPORT,
};
pub use numbers::{extract_numbers, numeric_similarity};

pub const DEFAULT_ENTITY_SIMILARITY: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ObjectKind {
    EntityRef,
    Text,
    Number,
    DateTime,
    Categorical,
}

impl ObjectKind {
    pub const ALL: [ObjectKind; 5] =
        [ObjectKind::EntityRef, ObjectKind::Text, ObjectKind::Number, ObjectKind::DateTime, ObjectKind::Categorical];
}

/// Current entity-pair scores, left graph first.
pub trait EntityScores {
    fn entity_score(&self, left: NodeId, right: NodeId) -> Option<f64>;
}

impl EntityScores for HashMap<(NodeId, NodeId), f64> {
    fn entity_score(&self, left: NodeId, right: NodeId) -> Option<f64> {
        self.get(&(left, right)).copied()
    }
}

impl<F: Fn(NodeId, NodeId) -> Option<f64>> EntityScores for F {
    fn entity_score(&self, left: NodeId, right: NodeId) -> Option<f64> {
        self(left, right)
    }
}

/// An object prepared for comparison.
#[derive(Debug, Clone, Copy)]
pub enum Object<'a> {
    Entity { id: NodeId, labels: &'a [String] },
    Text(&'a str),
    Number { value: f64, raw: &'a str },
    DateTime { timestamp: i64, has_time: bool, raw: &'a str },
    Categorical { value: &'a str, domain: &'a CategoricalDomain },
}

impl<'a> Object<'a> {
    /// Text literals become categorical when their predicate has a domain.
    pub fn from_literal(lit: &'a LiteralValue, domain: Option<&'a CategoricalDomain>) -> Self {
        match (lit.kind, lit.parsed_number, lit.parsed_timestamp) {
            (LiteralKind::Number, Some(value), _) => Object::Number { value, raw: &lit.raw },
            (LiteralKind::DateTime, _, Some(timestamp)) => {
                Object::DateTime { timestamp, has_time: lit.has_time_of_day, raw: &lit.raw }
            }
            _ => match domain {
                Some(domain) => Object::Categorical { value: &lit.raw, domain },
                None => Object::Text(&lit.raw),
            },
        }
    }

    pub fn kind(&self) -> ObjectKind {
        match self {
            Object::Entity { .. } => ObjectKind::EntityRef,
            Object::Text(_) => ObjectKind::Text,
            Object::Number { .. } => ObjectKind::Number,
            Object::DateTime { .. } => ObjectKind::DateTime,
            Object::Categorical { .. } => ObjectKind::Categorical,
        }
    }

    /// Strings this object offers when compared as text.
    fn strings(&self) -> Vec<&'a str> {
        match *self {
            Object::Entity { labels, .. } => labels.iter().map(String::as_str).collect(),
            Object::Text(s) | Object::Number { raw: s, .. } | Object::DateTime { raw: s, .. } => vec![s],
            Object::Categorical { value, .. } => vec![value],
        }
    }
}

/// Table row used for an ordered kind pair. Every one of the 25 pairs has
/// exactly one row; the table is symmetric.
pub fn dispatch_row(a: ObjectKind, b: ObjectKind) -> u8 {
    use ObjectKind::*;
    let (x, y) = if a <= b { (a, b) } else { (b, a) };
    match (x, y) {
        (EntityRef, EntityRef) => 1,
        (EntityRef, Text) => 2,
        (EntityRef, Categorical) => 3,
        (EntityRef, Number) => 7,
        (EntityRef, DateTime) => 10,
        (Text, Text) => 11,
        (Text, Number) => 7,
        (Text, DateTime) => 10,
        (Text, Categorical) => 5,
        (Number, Number) => 6,
        (Number, DateTime) => 8,
        (Number, Categorical) => 7,
        (DateTime, DateTime) => 9,
        (DateTime, Categorical) => 10,
        (Categorical, Categorical) => 4,
        _ => unreachable!("pair is ordered"),
    }
}

fn best_fuzzy(xs: &[&str], ys: &[&str]) -> f64 {
    xs.iter().flat_map(|x| ys.iter().map(move |y| fuzzy_similarity(x, y))).fold(0.0, f64::max)
}

/// Same calendar date when either side has no time of day, otherwise
/// scaled distance on epoch seconds.
pub fn date_similarity(a: (i64, bool), b: (i64, bool)) -> f64 {
    let (ta, ha) = a;
    let (tb, hb) = b;
    if ta == tb || ((!ha || !hb) && ta.div_euclid(86_400) == tb.div_euclid(86_400)) {
        return 1.0;
    }
    numeric_similarity(ta as f64, tb as f64)
}

/// Bare numbers are years when they look like one, else epoch seconds.
fn number_as_timestamp(n: f64) -> f64 {
    year_like(n).and_then(year_timestamp).map_or(n, |ts| ts as f64)
}

/// Row 5: the string is resolved to its closest category value; the score
/// is that match if it is the categorical object's own value, else 0.
fn categorical_vs_strings(value: &str, domain: &CategoricalDomain, strings: &[&str]) -> f64 {
    let own = crate::label::normalize_label(value);
    strings
        .iter()
        .filter_map(|s| domain.closest(s))
        .filter(|(v, _)| *v == own)
        .map(|(_, sim)| sim)
        .fold(0.0, f64::max)
}

fn numbers_vs_strings(n: f64, raw: &str, strings: &[&str]) -> f64 {
    strings
        .iter()
        .map(|s| {
            let extracted =
                extract_numbers(s).into_iter().map(|x| numeric_similarity(n, x)).fold(0.0, f64::max);
            extracted.max(fuzzy_similarity(raw, s))
        })
        .fold(0.0, f64::max)
}

fn date_vs_strings(date: (i64, bool), strings: &[&str]) -> f64 {
    let best = strings
        .iter()
        .filter_map(|s| extract_date(s))
        .map(|d| date_similarity(date, d))
        .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.max(x))));
    best.unwrap_or_else(|| {
        log::trace!("no date found in {strings:?}");
        0.0
    })
}

/// Similarity of two objects and the table row that produced it. `left` is
/// always from the first graph when entity scores are consulted.
pub fn object_similarity_row(left: &Object<'_>, right: &Object<'_>, scores: &dyn EntityScores) -> (u8, f64) {
    let row = dispatch_row(left.kind(), right.kind());
    if let (Object::Entity { id: l, .. }, Object::Entity { id: r, .. }) = (left, right) {
        return (row, scores.entity_score(*l, *r).unwrap_or(DEFAULT_ENTITY_SIMILARITY).clamp(0.0, 1.0));
    }
    // the remaining rows are symmetric: put the lower kind first
    let (a, b) = if left.kind() <= right.kind() { (left, right) } else { (right, left) };
    let value = match (*a, *b) {
        (Object::Entity { labels, .. }, Object::Categorical { value, domain }) => {
            let strings: Vec<&str> = labels.iter().map(String::as_str).collect();
            let m = categorical_vs_strings(value, domain, &strings);
            if m >= CATEGORY_FUZZY_MIN { m } else { 0.0 }
        }
        (Object::Categorical { value: v1, domain: d1 }, Object::Categorical { value: v2, domain: d2 }) => {
            categorical_vs_strings(v1, d1, &[v2]).max(categorical_vs_strings(v2, d2, &[v1]))
        }
        (Object::Text(s), Object::Categorical { value, domain }) => categorical_vs_strings(value, domain, &[s]),
        (Object::Number { value: x, .. }, Object::Number { value: y, .. }) => numeric_similarity(x, y),
        (Object::Number { value, .. }, Object::DateTime { timestamp, .. }) => {
            numeric_similarity(number_as_timestamp(value), timestamp as f64)
        }
        (Object::DateTime { timestamp: t1, has_time: h1, .. }, Object::DateTime { timestamp: t2, has_time: h2, .. }) => {
            date_similarity((t1, h1), (t2, h2))
        }
        (other, Object::Number { value, raw }) | (Object::Number { value, raw }, other) => {
            numbers_vs_strings(value, raw, &other.strings())
        }
        (other, Object::DateTime { timestamp, has_time, .. }) | (Object::DateTime { timestamp, has_time, .. }, other) => {
            date_vs_strings((timestamp, has_time), &other.strings())
        }
        (x, y) => best_fuzzy(&x.strings(), &y.strings()),
    };
    (row, value.clamp(0.0, 1.0))
}

pub fn object_similarity(left: &Object<'_>, right: &Object<'_>, scores: &dyn EntityScores) -> f64 {
    object_similarity_row(left, right, scores).1
}
