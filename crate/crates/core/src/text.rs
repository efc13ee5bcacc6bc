//! Small string helpers shared by the parser, engine and evaluator.

/// Levenshtein distance over chars.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Levenshtein distance divided by the longer length; 0 for two empty strings.
pub fn normalized_levenshtein(a: &str, b: &str) -> f64 {
    let len = a.chars().count().max(b.chars().count());
    if len == 0 {
        return 0.0;
    }
    levenshtein(a, b) as f64 / len as f64
}

/// Lowercase, underscores to spaces, collapsed whitespace.
pub fn normalize_identifier(s: &str) -> String {
    s.to_lowercase().replace('_', " ").split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Lowercase snake_case form of a phrase: `"The Gini coefficient"` stays
/// word-for-word, giving `"the_gini_coefficient"`.
pub fn snake_case(phrase: &str) -> String {
    phrase.split(|c: char| c.is_whitespace() || c == '_').filter(|w| !w.is_empty()).map(str::to_lowercase).collect::<Vec<_>>().join("_")
}

/// True when the token sequence of `needle` occurs contiguously in `hay`.
pub fn contains_tokens(hay: &str, needle: &str) -> bool {
    let h: Vec<&str> = hay.split(' ').filter(|t| !t.is_empty()).collect();
    let n: Vec<&str> = needle.split(' ').filter(|t| !t.is_empty()).collect();
    !n.is_empty() && n.len() <= h.len() && h.windows(n.len()).any(|w| w == n.as_slice())
}

/// Formats a value with two decimals, printing `-0.00` as `0.00`.
pub fn fmt2(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".to_string()
    } else {
        s
    }
}
