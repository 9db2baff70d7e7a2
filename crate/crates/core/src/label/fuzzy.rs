//! Token-robust fuzzy similarity built from the normalized indel ratio.

use std::collections::BTreeSet;

/// Length of the longest common subsequence over `char`s.
fn lcs_len(a: &[char], b: &[char]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let mut row = vec![0usize; short.len() + 1];
    for &lc in long {
        let mut diag = 0;
        for (j, &sc) in short.iter().enumerate() {
            let above = row[j + 1];
            row[j + 1] = if lc == sc { diag + 1 } else { above.max(row[j]) };
            diag = above;
        }
    }
    row[short.len()]
}

/// `1 - indel_distance / (|a| + |b|)`, which equals `2·LCS / (|a| + |b|)`.
/// Two empty strings are identical.
pub fn indel_similarity(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let total = a.len() + b.len();
    if total == 0 {
        return 1.0;
    }
    2.0 * lcs_len(&a, &b) as f64 / total as f64
}

fn token_sort(s: &str) -> String {
    let mut tokens: Vec<&str> = s.split_whitespace().collect();
    tokens.sort_unstable();
    tokens.join(" ")
}

fn join_parts(head: &str, tail: &[&str]) -> String {
    let tail = tail.join(" ");
    match (head.is_empty(), tail.is_empty()) {
        (true, _) => tail,
        (_, true) => head.to_string(),
        _ => format!("{head} {tail}"),
    }
}

fn token_set_similarity(a: &str, b: &str) -> f64 {
    let ta: BTreeSet<&str> = a.split_whitespace().collect();
    let tb: BTreeSet<&str> = b.split_whitespace().collect();
    if ta.is_empty() || tb.is_empty() {
        return 0.0;
    }
    let sect: Vec<&str> = ta.intersection(&tb).copied().collect();
    let diff_ab: Vec<&str> = ta.difference(&tb).copied().collect();
    let diff_ba: Vec<&str> = tb.difference(&ta).copied().collect();
    if !sect.is_empty() && (diff_ab.is_empty() || diff_ba.is_empty()) {
        return 1.0;
    }
    let sect = sect.join(" ");
    let ab = join_parts(&sect, &diff_ab);
    let ba = join_parts(&sect, &diff_ba);
    let mut best = indel_similarity(&ab, &ba);
    if !sect.is_empty() {
        best = best.max(indel_similarity(&sect, &ab)).max(indel_similarity(&sect, &ba));
    }
    best
}

/// Maximum of the plain indel ratio, the ratio over alphabetically sorted
/// tokens and 0.95 × the token-set ratio. Case-insensitive and symmetric.
pub fn fuzzy_similarity(a: &str, b: &str) -> f64 {
    let a = a.to_lowercase();
    let b = b.to_lowercase();
    if a.is_empty() || b.is_empty() {
        return if a.is_empty() && b.is_empty() { 1.0 } else { 0.0 };
    }
    let plain = indel_similarity(&a, &b);
    if plain == 1.0 {
        return 1.0;
    }
    let sorted = indel_similarity(&token_sort(&a), &token_sort(&b));
    let set = 0.95 * token_set_similarity(&a, &b);
    plain.max(sorted).max(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Exponential recursion; only for tiny inputs.
    fn lcs_oracle(a: &[char], b: &[char]) -> usize {
        match (a.split_first(), b.split_first()) {
            (None, _) | (_, None) => 0,
            (Some((x, ar)), Some((y, br))) => {
                if x == y {
                    1 + lcs_oracle(ar, br)
                } else {
                    lcs_oracle(ar, b).max(lcs_oracle(a, br))
                }
            }
        }
    }

    #[test]
    fn identical_strings() {
        assert_eq!(fuzzy_similarity("abc", "abc"), 1.0);
        assert_eq!(fuzzy_similarity("ABC", "abc"), 1.0);
    }

    #[test]
    fn disjoint_strings() {
        assert_eq!(fuzzy_similarity("abc", "xyz"), 0.0);
    }

    #[test]
    fn ncc_registry() {
        // LCS("ncc", "ncc-45167") = 3, so 2·3 / (3 + 9)
        let expected = 2.0 * 3.0 / 12.0;
        let got = fuzzy_similarity("NCC", "NCC-45167");
        assert!(got >= 0.5);
        assert!((got - expected).abs() < 1e-12);
    }

    #[test]
    fn token_order_does_not_matter() {
        assert_eq!(fuzzy_similarity("deep space nine", "nine deep space"), 1.0);
    }

    #[test]
    fn token_subset_scores_095() {
        assert!((fuzzy_similarity("located", "located in") - 0.95).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn lcs_matches_oracle(a in "[abc]{0,7}", b in "[abc]{0,7}") {
            let a: Vec<char> = a.chars().collect();
            let b: Vec<char> = b.chars().collect();
            prop_assert_eq!(lcs_len(&a, &b), lcs_oracle(&a, &b));
        }

        #[test]
        fn fuzzy_is_symmetric_and_bounded(a in "[a-d ]{0,12}", b in "[a-d ]{0,12}") {
            let ab = fuzzy_similarity(&a, &b);
            prop_assert_eq!(ab, fuzzy_similarity(&b, &a));
            prop_assert!((0.0..=1.0).contains(&ab));
        }
    }
}
