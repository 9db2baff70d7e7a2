//! Typed literal values and the number / date parsers shared by the
//! object-similarity dispatcher.

use std::sync::LazyLock;

use chrono::{DateTime, NaiveDate, NaiveDateTime, NaiveTime};
use regex::Regex;
use serde::{Deserialize, Serialize};

use super::Iri;

pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";

const NUMERIC_TYPES: &[&str] = &[
    "integer",
    "decimal",
    "float",
    "double",
    "int",
    "long",
    "short",
    "byte",
    "nonNegativeInteger",
    "nonPositiveInteger",
    "positiveInteger",
    "negativeInteger",
    "unsignedInt",
    "unsignedLong",
    "unsignedShort",
    "unsignedByte",
];

const DATE_TYPES: &[&str] = &["date", "dateTime", "dateTimeStamp", "gYear", "gYearMonth"];

static PLAIN_NUMBER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$").unwrap());
static GROUPED_NUMBER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^[+-]?\d{1,3}(,\d{3})+(\.\d+)?$").unwrap());

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LiteralKind {
    Text,
    Number,
    DateTime,
}

/// A literal object together with its typed interpretation.
///
/// `raw` always holds the lexical form exactly as it was read.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiteralValue {
    pub raw: String,
    pub kind: LiteralKind,
    pub parsed_number: Option<f64>,
    /// Seconds since the Unix epoch, UTC.
    pub parsed_timestamp: Option<i64>,
    /// False for plain dates, which compare at day precision.
    pub has_time_of_day: bool,
    pub datatype_iri: Option<Iri>,
    pub language_tag: Option<String>,
}

impl LiteralValue {
    pub fn text(raw: impl Into<String>) -> Self {
        Self {
            raw: raw.into(),
            kind: LiteralKind::Text,
            parsed_number: None,
            parsed_timestamp: None,
            has_time_of_day: false,
            datatype_iri: None,
            language_tag: None,
        }
    }

    pub fn with_language(mut self, tag: impl Into<String>) -> Self {
        self.language_tag = Some(tag.into());
        self
    }

    /// Identity used for deduplication and counting: lexical form,
    /// datatype and language tag, compared exactly.
    pub fn key(&self) -> LiteralKey {
        LiteralKey {
            raw: self.raw.clone(),
            datatype: self.datatype_iri.clone(),
            language: self.language_tag.clone(),
        }
    }

    pub fn is_year_like(&self) -> Option<i32> {
        year_like(self.parsed_number?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LiteralKey {
    pub raw: String,
    pub datatype: Option<Iri>,
    pub language: Option<String>,
}

/// Strips the `xsd:string` datatype, which RDF 1.1 treats as the type of
/// every plain literal.
pub fn canonical_datatype(datatype: Option<&Iri>) -> Option<Iri> {
    match datatype {
        Some(dt) if dt.as_str() == "http://www.w3.org/2001/XMLSchema#string" => None,
        Some(dt) if dt.as_str() == "http://www.w3.org/1999/02/22-rdf-syntax-ns#langString" => None,
        other => other.cloned(),
    }
}

fn xsd_local(datatype: Option<&Iri>) -> Option<&str> {
    datatype.and_then(|dt| dt.as_str().strip_prefix(XSD))
}

/// Classifies a lexical form into Number, DateTime or Text.
///
/// A typed datatype wins when its lexical form actually parses; otherwise
/// the raw string is sniffed (number first, then the accepted date forms).
pub fn classify_literal(raw: &str, datatype: Option<&Iri>) -> LiteralValue {
    let datatype = canonical_datatype(datatype);
    let mut value = LiteralValue::text(raw);
    value.datatype_iri = datatype.clone();

    let local = xsd_local(datatype.as_ref());
    let declared_numeric = local.is_some_and(|l| NUMERIC_TYPES.contains(&l));
    let declared_date = local.is_some_and(|l| DATE_TYPES.contains(&l));

    if declared_date {
        let parsed = match local {
            Some("gYear") => raw.trim().parse::<i32>().ok().and_then(year_start),
            Some("gYearMonth") => parse_year_month(raw.trim()),
            _ => parse_date(raw),
        };
        if let Some((ts, has_time)) = parsed {
            value.kind = LiteralKind::DateTime;
            value.parsed_timestamp = Some(ts);
            value.has_time_of_day = has_time;
            return value;
        }
    }
    if let Some(n) = parse_number(raw) {
        value.kind = LiteralKind::Number;
        value.parsed_number = Some(n);
        return value;
    }
    if !declared_numeric {
        if let Some((ts, has_time)) = parse_date(raw) {
            value.kind = LiteralKind::DateTime;
            value.parsed_timestamp = Some(ts);
            value.has_time_of_day = has_time;
        }
    }
    value
}

/// Parses integer, decimal and scientific forms. Thousands separators are
/// accepted only as strict groups of three digits ("1,234,567").
pub fn parse_number(raw: &str) -> Option<f64> {
    let s = raw.trim();
    if PLAIN_NUMBER.is_match(s) {
        return s.parse::<f64>().ok().filter(|v| v.is_finite());
    }
    if GROUPED_NUMBER.is_match(s) {
        return s.replace(',', "").parse::<f64>().ok();
    }
    None
}

fn year_start(year: i32) -> Option<(i64, bool)> {
    let d = NaiveDate::from_ymd_opt(year, 1, 1)?;
    Some((d.and_time(NaiveTime::MIN).and_utc().timestamp(), false))
}

fn parse_year_month(s: &str) -> Option<(i64, bool)> {
    let (y, m) = s.split_once('-')?;
    let d = NaiveDate::from_ymd_opt(y.parse().ok()?, m.parse().ok()?, 1)?;
    Some((d.and_time(NaiveTime::MIN).and_utc().timestamp(), false))
}

const DATE_FORMATS: &[&str] = &["%Y-%m-%d", "%B %d, %Y", "%B %d %Y", "%d %B %Y", "%d %B, %Y"];

/// Parses ISO-8601 dates and date-times plus the English "March 12, 2009"
/// and "12 March 2009" forms. Values without a zone are taken as UTC.
/// Returns the epoch timestamp and whether a time of day was present.
pub fn parse_date(raw: &str) -> Option<(i64, bool)> {
    let s = raw.trim();
    if s.len() < 6 {
        return None;
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some((dt.timestamp(), true));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some((dt.and_utc().timestamp(), true));
        }
    }
    // xsd:date allows a trailing zone designator
    let date_part = s.strip_suffix('Z').unwrap_or(s);
    for fmt in DATE_FORMATS {
        if let Ok(d) = NaiveDate::parse_from_str(date_part, fmt) {
            return Some((d.and_time(NaiveTime::MIN).and_utc().timestamp(), false));
        }
    }
    None
}

static DATE_IN_TEXT: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"(?i)\d{4}-\d{2}-\d{2}(T\d{2}:\d{2}:\d{2}(\.\d+)?(Z|[+-]\d{2}:\d{2})?)?|(January|February|March|April|May|June|July|August|September|October|November|December|Jan|Feb|Mar|Apr|Jun|Jul|Aug|Sep|Sept|Oct|Nov|Dec)\.? \d{1,2},? \d{4}|\d{1,2} (January|February|March|April|May|June|July|August|September|October|November|December|Jan|Feb|Mar|Apr|Jun|Jul|Aug|Sep|Sept|Oct|Nov|Dec)\.?,? \d{4}",
    )
    .unwrap()
});

/// Finds the first date embedded anywhere in free text.
pub fn extract_date(s: &str) -> Option<(i64, bool)> {
    if let Some(found) = parse_date(s) {
        return Some(found);
    }
    DATE_IN_TEXT
        .find_iter(s)
        .find_map(|m| parse_date(&m.as_str().replace('.', "")))
}

/// Interprets a bare number as a calendar year when it is a four-digit
/// integer in [1000, 2999].
pub fn year_like(n: f64) -> Option<i32> {
    (n.fract() == 0.0 && (1000.0..=2999.0).contains(&n)).then_some(n as i32)
}

pub fn year_timestamp(year: i32) -> Option<i64> {
    year_start(year).map(|(ts, _)| ts)
}
