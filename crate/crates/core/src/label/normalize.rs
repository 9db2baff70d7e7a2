use std::collections::HashSet;
use std::sync::LazyLock;

use regex::Regex;

static STOPWORDS: LazyLock<HashSet<&'static str>> = LazyLock::new(|| {
    include_str!("../../resources/stopwords_en.txt")
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .collect()
});

static PARENTHESIZED: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\([^()]*\)").unwrap());

pub fn stopwords() -> &'static HashSet<&'static str> {
    &STOPWORDS
}

fn remove_parenthesized(s: &str) -> String {
    let mut out = s.to_string();
    loop {
        let next = PARENTHESIZED.replace_all(&out, " ").into_owned();
        if next == out {
            return out;
        }
        out = next;
    }
}

fn is_boundary(prev: char, c: char, next: Option<char>) -> bool {
    (prev.is_lowercase() && c.is_uppercase())
        || (prev.is_uppercase() && c.is_uppercase() && next.is_some_and(char::is_lowercase))
        || (prev.is_alphabetic() && c.is_numeric())
        || (prev.is_numeric() && c.is_alphabetic())
}

/// Lowercases, drops parenthesized segments and punctuation, splits camel
/// case and letter/digit runs, and collapses whitespace.
///
/// `"Asgardians_(comics)"` becomes `"asgardians"`, `"CamelCase42Name"`
/// becomes `"camel case 42 name"`.
pub fn normalize_label(s: &str) -> String {
    let mut current = normalize_once(s);
    for _ in 0..8 {
        let next = normalize_once(&current);
        if next == current {
            break;
        }
        current = next;
    }
    current
}

fn normalize_once(s: &str) -> String {
    let stripped: String = remove_parenthesized(s).chars().filter(|c| !matches!(c, '\'' | '\u{2019}')).collect();
    let chars: Vec<char> = stripped.chars().collect();
    let mut spaced = String::with_capacity(stripped.len() + 8);
    for (i, &c) in chars.iter().enumerate() {
        if i > 0 && is_boundary(chars[i - 1], c, chars.get(i + 1).copied()) {
            spaced.push(' ');
        }
        spaced.push(c);
    }
    let mut cleaned = String::with_capacity(spaced.len());
    for c in spaced.to_lowercase().chars() {
        match c {
            '\'' | '\u{2019}' | '\u{0300}'..='\u{036F}' => {}
            c if c.is_alphanumeric() => cleaned.push(c),
            _ => cleaned.push(' '),
        }
    }
    cleaned.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Removes English stopwords from an already normalized label, keeping
/// token order.
pub fn strip_stopwords(s: &str) -> String {
    s.split_whitespace()
        .filter(|tok| !STOPWORDS.contains(tok))
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn stopword_resource_size() {
        assert_eq!(stopwords().len(), 179);
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize_label("Asgardians_(comics)"), "asgardians");
        assert_eq!(normalize_label("Asgardians (comics)"), "asgardians");
        assert_eq!(normalize_label(""), "");
        assert_eq!(normalize_label("CamelCase42Name"), "camel case 42 name");
        assert_eq!(normalize_label("XMLHttpRequest"), "xml http request");
        assert_eq!(normalize_label("NCC-45167"), "ncc 45167");
        assert_eq!(normalize_label("Star Trek: Deep Space Nine"), "star trek deep space nine");
        assert_eq!(normalize_label("Khan (a (nested) note) Singh"), "khan singh");
        assert_eq!(normalize_label("Tønsberg"), "tønsberg");
    }

    #[test]
    fn stopword_examples() {
        assert_eq!(strip_stopwords("the old republic"), "old republic");
        assert_eq!(strip_stopwords("old republic"), "old republic");
        assert_eq!(strip_stopwords("the of a"), "");
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(s in "\\PC{0,40}") {
            let once = normalize_label(&s);
            prop_assert_eq!(normalize_label(&once), once.clone());
        }

        #[test]
        fn normalize_is_idempotent_on_label_like(s in "[A-Za-z0-9_ ()\\-:,.]{0,40}") {
            let once = normalize_label(&s);
            prop_assert_eq!(normalize_label(&once), once.clone());
        }

        #[test]
        fn strip_stopwords_is_fixpoint(s in "[a-z ]{0,40}") {
            let once = strip_stopwords(&normalize_label(&s));
            prop_assert_eq!(strip_stopwords(&once), once.clone());
        }
    }
}
