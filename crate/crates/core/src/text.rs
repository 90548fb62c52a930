//! Small text helpers shared by extraction, filtering and alignment.

/// Function words ignored when comparing phrase content.
pub const STOPWORDS: &[&str] = &[
    "a", "an", "and", "are", "as", "at", "be", "been", "by", "for", "from", "has", "have", "in",
    "is", "it", "its", "of", "on", "or", "that", "the", "their", "these", "this", "those", "to",
    "was", "were", "which", "with",
];

pub fn is_stopword(token: &str) -> bool {
    STOPWORDS.binary_search(&token).is_ok()
}

/// A lowercased word together with its byte range in the source string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordSpan {
    pub start: usize,
    pub end: usize,
    pub lower: String,
}

/// Splits on every non-alphanumeric character.
pub fn word_spans(input: &str) -> Vec<WordSpan> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, c) in input.char_indices() {
        if c.is_alphanumeric() {
            if start.is_none() {
                start = Some(i);
            }
        } else if let Some(s) = start.take() {
            out.push(WordSpan { start: s, end: i, lower: input[s..i].to_lowercase() });
        }
    }
    if let Some(s) = start {
        out.push(WordSpan { start: s, end: input.len(), lower: input[s..].to_lowercase() });
    }
    out
}

pub fn tokens(input: &str) -> Vec<String> {
    word_spans(input).into_iter().map(|w| w.lower).collect()
}

/// Lowercase, map every run of non-alphanumerics to a single underscore and
/// trim underscores from both ends.
pub fn slugify(phrase: &str) -> String {
    let mut slug = String::with_capacity(phrase.len());
    let mut pending_sep = false;
    for c in phrase.chars() {
        if c.is_alphanumeric() {
            if pending_sep && !slug.is_empty() {
                slug.push('_');
            }
            pending_sep = false;
            slug.extend(c.to_lowercase());
        } else {
            pending_sep = true;
        }
    }
    slug
}
