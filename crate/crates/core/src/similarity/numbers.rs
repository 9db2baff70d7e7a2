/// `1 - |a - b| / max(|a|, |b|)`, clamped to [0, 1]; equal inputs give 1.
pub fn numeric_similarity(a: f64, b: f64) -> f64 {
    if a == b {
        return 1.0;
    }
    if !a.is_finite() || !b.is_finite() {
        return 0.0;
    }
    let scale = a.abs().max(b.abs());
    // distinct inputs never round up to an exact match
    (1.0 - (a - b).abs() / scale).clamp(0.0, 1.0 - f64::EPSILON / 2.0)
}

fn is_digit(c: Option<&u8>) -> bool {
    c.is_some_and(u8::is_ascii_digit)
}

fn is_alnum(c: Option<&u8>) -> bool {
    c.is_some_and(u8::is_ascii_alphanumeric)
}

/// Every maximal integer or decimal run in `s`. A sign binds only when it
/// does not follow an alphanumeric ("NCC-45167" yields 45167); comma
/// thousands groups are joined only when they are exactly three digits.
pub fn extract_numbers(s: &str) -> Vec<f64> {
    let b = s.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let prev = i.checked_sub(1).and_then(|p| b.get(p));
        let starts_digit = b[i].is_ascii_digit();
        let starts_dot = b[i] == b'.' && is_digit(b.get(i + 1)) && !is_digit(prev);
        let starts_sign = matches!(b[i], b'-' | b'+')
            && !is_alnum(prev)
            && (is_digit(b.get(i + 1)) || (b.get(i + 1) == Some(&b'.') && is_digit(b.get(i + 2))));
        if !(starts_digit || starts_dot || starts_sign) {
            i += 1;
            continue;
        }
        let start = i;
        if starts_sign {
            i += 1;
        }
        let int_start = i;
        while is_digit(b.get(i)) {
            i += 1;
        }
        let mut text: String = s[start..i].to_string();
        if (1..=3).contains(&(i - int_start)) {
            while b.get(i) == Some(&b',')
                && (1..=3).all(|k| is_digit(b.get(i + k)))
                && !is_digit(b.get(i + 4))
            {
                text.push_str(&s[i + 1..i + 4]);
                i += 4;
            }
        }
        if b.get(i) == Some(&b'.') && is_digit(b.get(i + 1)) {
            let frac_start = i;
            i += 1;
            while is_digit(b.get(i)) {
                i += 1;
            }
            text.push_str(&s[frac_start..i]);
        }
        if let Ok(v) = text.parse::<f64>() {
            out.push(v);
        }
    }
    out
}
