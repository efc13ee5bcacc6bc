//! Tokenization and span bookkeeping for the rule-based interpreter.

use std::sync::OnceLock;

use regex::Regex;

use super::lexicon::is_function_word;
use crate::schema::{ConditionClause, Scalar};
use crate::text::{contains_tokens, normalize_identifier, normalized_levenshtein, snake_case};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Word,
    Number,
    Punct,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub text: String,
    pub lower: String,
    pub start: usize,
    pub end: usize,
    pub kind: TokenKind,
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-' || c == '\'' || c == '.'
}

/// Splits text into words, numbers and single-character punctuation.
/// Trailing dots and apostrophes are not part of a word.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    let mut iter = text.char_indices().peekable();
    while let Some(&(i, c)) = iter.peek() {
        if c.is_whitespace() {
            iter.next();
            continue;
        }
        if is_word_char(c) && c != '.' && c != '\'' || (c == '-' || c == '.') && next_is_digit(text, i) {
            let mut end = i;
            while let Some(&(j, d)) = iter.peek() {
                if is_word_char(d) {
                    end = j + d.len_utf8();
                    iter.next();
                } else {
                    break;
                }
            }
            let mut raw = &text[i..end];
            while raw.ends_with('.') || raw.ends_with('\'') || raw.ends_with('-') {
                raw = &raw[..raw.len() - 1];
            }
            if raw.is_empty() {
                continue;
            }
            let end = i + raw.len();
            let kind = if raw.parse::<f64>().is_ok() { TokenKind::Number } else { TokenKind::Word };
            out.push(Token { text: raw.to_string(), lower: raw.to_lowercase(), start: i, end, kind });
        } else {
            iter.next();
            out.push(Token { text: c.to_string(), lower: c.to_string(), start: i, end: i + c.len_utf8(), kind: TokenKind::Punct });
        }
    }
    out
}

fn next_is_digit(text: &str, i: usize) -> bool {
    text[i + 1..].chars().next().is_some_and(|c| c.is_ascii_digit())
}

fn dataset_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)\b[A-Za-z0-9_\-]+\.csv\b").unwrap())
}

/// First `identifier.csv` token and its byte span.
pub fn find_dataset(text: &str) -> Option<(String, usize, usize)> {
    dataset_re().find(text).map(|m| (m.as_str().to_string(), m.start(), m.end()))
}

const VALUE: &str = r#"(-?\d+(?:\.\d+)?|'[^']*'|"[^"]*")"#;
const LINK: &str = r"(?:==|=|is set at|is set to|is fixed at|is held at|is equal to|equals|stands at|sits at)";

fn paren_condition_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(&format!(r"(?i)\(\s*([A-Za-z][A-Za-z0-9_\-]*)\s*{LINK}\s*{VALUE}\s*\)")).unwrap())
}

fn link_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(&format!(r"(?i)\s*{LINK}\s*{VALUE}")).unwrap())
}

fn unquote(v: &str) -> Scalar {
    let t = v.trim_matches(|c| c == '\'' || c == '"');
    Scalar::parse(t)
}

/// A condition and the byte span of text it covers (name through value).
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionSpan {
    pub clause: ConditionClause,
    pub start: usize,
    pub end: usize,
}

/// Finds `name = v`, `name is set at v`, `name stands at v` and the
/// parenthesized forms. A prose clause directly followed by a parenthesized
/// one takes the parenthesized name, as in
/// `the poverty rate stands at 0.32 (poverty_ratio = 0.32)`.
pub fn find_conditions(text: &str, tokens: &[Token]) -> Vec<ConditionSpan> {
    let parens: Vec<(usize, usize, ConditionClause)> = paren_condition_re()
        .captures_iter(text)
        .map(|c| {
            let m = c.get(0).unwrap();
            (m.start(), m.end(), ConditionClause { variable: c[1].to_string(), value: unquote(&c[2]) })
        })
        .collect();
    let in_paren = |pos: usize| parens.iter().any(|(s, e, _)| pos >= *s && pos < *e);

    let mut out: Vec<ConditionSpan> = Vec::new();
    let mut used_parens = vec![false; parens.len()];
    for m in link_re().captures_iter(text) {
        let whole = m.get(0).unwrap();
        if in_paren(whole.start() + 1) {
            continue;
        }
        // Name: the word run ending right before the link phrase.
        let Some((name, name_start)) = name_before(tokens, whole.start()) else { continue };
        let mut span =
            ConditionSpan { clause: ConditionClause { variable: name, value: unquote(&m[1]) }, start: name_start, end: whole.end() };
        if let Some(k) = parens.iter().position(|(s, _, _)| *s >= whole.end() && text[whole.end()..*s].trim().is_empty()) {
            used_parens[k] = true;
            span.clause = parens[k].2.clone();
            span.end = parens[k].1;
        }
        out.push(span);
    }
    for (k, (s, e, clause)) in parens.iter().enumerate() {
        if used_parens[k] {
            continue;
        }
        // A long form right before the parenthesis belongs to the condition.
        let start = run_before(tokens, *s).map_or(*s, |(st, _)| st);
        out.push(ConditionSpan { clause: clause.clone(), start, end: *e });
    }
    out.sort_by_key(|c| c.start);
    out
}

/// Word run (no function words, no punctuation) ending at byte `pos`.
fn run_before(tokens: &[Token], pos: usize) -> Option<(usize, Vec<&Token>)> {
    let mut idx = tokens.iter().rposition(|t| t.end <= pos)?;
    let mut run = Vec::new();
    loop {
        let t = &tokens[idx];
        if t.kind != TokenKind::Word || is_function_word(&t.lower) || t.lower.ends_with(".csv") {
            break;
        }
        run.push(t);
        if idx == 0 {
            break;
        }
        idx -= 1;
    }
    if run.is_empty() {
        return None;
    }
    run.reverse();
    Some((run[0].start, run))
}

fn name_before(tokens: &[Token], pos: usize) -> Option<(String, usize)> {
    let (start, run) = run_before(tokens, pos)?;
    // An identifier token wins over a multiword phrase.
    if let Some(last) = run.last() {
        if last.text.contains('_') {
            return Some((last.text.clone(), last.start));
        }
    }
    let phrase = run.iter().map(|t| t.text.as_str()).collect::<Vec<_>>().join(" ");
    Some((snake_case(&phrase), start))
}

/// A candidate variable mention.
#[derive(Debug, Clone, PartialEq)]
pub struct Mention {
    /// Identifier after alias resolution / column matching.
    pub ident: String,
    pub start: usize,
    pub end: usize,
}

fn covered(spans: &[(usize, usize)], t: &Token) -> bool {
    spans.iter().any(|(s, e)| t.start >= *s && t.end <= *e)
}

/// Mentions in order of appearance. `blocked` spans (dataset, conditions)
/// never contribute words. A token spelled exactly like one of `columns`
/// is a mention on its own, even when it is also a function word.
pub fn find_mentions(tokens: &[Token], blocked: &[(usize, usize)], columns: &[String]) -> Vec<Mention> {
    let mut out: Vec<Mention> = Vec::new();
    let mut run: Vec<usize> = Vec::new();
    let mut i = 0;

    let flush = |run: &mut Vec<usize>, out: &mut Vec<Mention>| {
        if run.is_empty() {
            return;
        }
        let phrase = run.iter().map(|&k| tokens[k].text.as_str()).collect::<Vec<_>>().join(" ");
        out.push(Mention {
            ident: snake_case(&strip_possessive(&phrase)),
            start: tokens[run[0]].start,
            end: tokens[*run.last().unwrap()].end,
        });
        run.clear();
    };

    while i < tokens.len() {
        let t = &tokens[i];
        // `( alias )` replaces the long form before it.
        if t.text == "("
            && i + 2 < tokens.len()
            && tokens[i + 2].text == ")"
            && tokens[i + 1].kind == TokenKind::Word
            && !covered(blocked, &tokens[i + 1])
        {
            let alias = &tokens[i + 1];
            let alias_words: Vec<String> = alias.lower.split('_').map(str::to_string).collect();
            let long_start = long_form_start(tokens, i, &alias_words);
            match long_start {
                Some(ls) => {
                    run.clear();
                    let cut = tokens[ls].start;
                    out.retain(|m| m.start < cut);
                }
                None => run.clear(),
            }
            let start = long_start.map_or_else(|| alias.start, |k| tokens[k].start);
            out.push(Mention { ident: alias.text.clone(), start, end: tokens[i + 2].end });
            i += 3;
            continue;
        }
        let free = t.kind == TokenKind::Word && !covered(blocked, t) && !t.lower.ends_with(".csv");
        let content = free && !is_function_word(&t.lower);
        let column = free && !content && columns.contains(&t.text);
        if content || column {
            if t.text.contains('_') || column {
                flush(&mut run, &mut out);
                run.push(i);
                flush(&mut run, &mut out);
            } else {
                run.push(i);
            }
        } else {
            flush(&mut run, &mut out);
        }
        i += 1;
    }
    flush(&mut run, &mut out);
    out
}

/// Index of the first token of the long form preceding the `(` at `paren`:
/// either the exact words of the alias, or the word run right before it.
fn long_form_start(tokens: &[Token], paren: usize, alias_words: &[String]) -> Option<usize> {
    let n = alias_words.len();
    if paren >= n {
        let window = &tokens[paren - n..paren];
        if window.iter().zip(alias_words).all(|(t, w)| t.lower == *w) {
            return Some(paren - n);
        }
    }
    let mut k = paren;
    while k > 0 {
        let t = &tokens[k - 1];
        if t.kind != TokenKind::Word || is_function_word(&t.lower) || t.lower.ends_with(".csv") {
            break;
        }
        k -= 1;
    }
    (k < paren).then_some(k)
}

fn strip_possessive(s: &str) -> String {
    s.replace("'s ", " ").trim_end_matches("'s").to_string()
}

/// Maps a mention onto a known column: exact (case/underscore-insensitive),
/// then unique nearest under normalized edit distance, then unique
/// token-boundary containment.
pub fn match_column(mention: &str, columns: &[String], threshold: f64) -> Option<String> {
    let norm = normalize_identifier(mention);
    if let Some(c) = columns.iter().find(|c| normalize_identifier(c) == norm) {
        return Some(c.clone());
    }
    let scored: Vec<(f64, &String)> = columns.iter().map(|c| (normalized_levenshtein(&norm, &normalize_identifier(c)), c)).collect();
    let best = scored.iter().map(|(d, _)| *d).fold(f64::INFINITY, f64::min);
    if best <= threshold {
        let hits: Vec<&String> = scored.iter().filter(|(d, _)| *d == best).map(|(_, c)| *c).collect();
        if hits.len() == 1 {
            return Some(hits[0].clone());
        }
    }
    let hits: Vec<&String> = columns
        .iter()
        .filter(|c| {
            let cn = normalize_identifier(c);
            contains_tokens(&cn, &norm) || contains_tokens(&norm, &cn)
        })
        .collect();
    if hits.len() == 1 {
        return Some(hits[0].clone());
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenizer_keeps_identifiers_and_numbers() {
        let t = tokenize("If x_1 = -0.32 (in a.csv), e-commerce's rate?");
        let texts: Vec<&str> = t.iter().map(|t| t.text.as_str()).collect();
        assert_eq!(texts, ["If", "x_1", "=", "-0.32", "(", "in", "a.csv", ")", ",", "e-commerce's", "rate", "?"]);
        assert_eq!(t[3].kind, TokenKind::Number);
    }

    #[test]
    fn prose_condition_takes_parenthesized_alias() {
        let q = "If the poverty rate stands at 0.32 (poverty_ratio = 0.32), what now?";
        let toks = tokenize(q);
        let c = find_conditions(q, &toks);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].clause, ConditionClause::new("poverty_ratio", 0.32));
        assert_eq!(&q[c[0].start..c[0].end], "poverty rate stands at 0.32 (poverty_ratio = 0.32)");
    }

    #[test]
    fn inline_and_prose_conditions() {
        let q = "for units where region_code = 3 and the household income is set at 0.5";
        let toks = tokenize(q);
        let c = find_conditions(q, &toks);
        assert_eq!(c[0].clause, ConditionClause::new("region_code", 3.0));
        assert_eq!(c[1].clause, ConditionClause::new("household_income", 0.5));
    }

    #[test]
    fn alias_replaces_long_form() {
        let q = "How does the labor force participation rate (labor_participation_rate) matter";
        let m = find_mentions(&tokenize(q), &[], &[]);
        assert_eq!(m.len(), 2);
        assert_eq!(m[0].ident, "labor_participation_rate");
        assert_eq!(m[1].ident, "matter");
    }

    #[test]
    fn column_matching_rules() {
        let cols = vec!["building_code_compliance_rate".to_string(), "satisfaction_rate".to_string()];
        assert_eq!(match_column("Building code compliance rate", &cols, 0.25).as_deref(), Some("building_code_compliance_rate"));
        assert_eq!(match_column("satisfaction", &cols, 0.25).as_deref(), Some("satisfaction_rate"));
        assert_eq!(match_column("satisfaction_rat", &cols, 0.25).as_deref(), Some("satisfaction_rate"));
        assert_eq!(match_column("rate", &cols, 0.25), None);
    }
}
