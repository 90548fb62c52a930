//! Media identity, plain-text extraction and sentence segmentation.

use std::fmt;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use scraper::{Html, Node};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MediaError {
    #[error("media source is empty")]
    EmptySource,
    #[error("invalid URL `{0}`: {1}")]
    InvalidUrl(String, String),
    #[error("unsupported media type `{0}`")]
    UnsupportedMediaType(String),
    #[error("document is not valid UTF-8: {0}")]
    Decode(String),
    #[error("document contains no text")]
    NoText,
    #[error("invalid media id `{0}`")]
    InvalidId(String),
}

/// 16 lowercase hex characters: the first 8 bytes of a SHA-256 digest.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct MediaId(String);

impl MediaId {
    pub fn for_url(url: &str) -> Result<Self, MediaError> {
        let canonical = canonicalize_url(url)?;
        Ok(Self::digest(b"url\0", canonical.as_bytes()))
    }

    pub fn for_content(bytes: &[u8]) -> Result<Self, MediaError> {
        if bytes.is_empty() {
            return Err(MediaError::EmptySource);
        }
        Ok(Self::digest(b"content\0", bytes))
    }

    fn digest(domain: &[u8], bytes: &[u8]) -> Self {
        let mut h = Sha256::new();
        h.update(domain);
        h.update(bytes);
        let out = h.finalize();
        Self(hex::encode(&out[..8]))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for MediaId {
    type Error = MediaError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        if value.len() == 16 && value.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b)) {
            Ok(Self(value))
        } else {
            Err(MediaError::InvalidId(value))
        }
    }
}

impl std::str::FromStr for MediaId {
    type Err = MediaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::try_from(s.to_string())
    }
}

impl From<MediaId> for String {
    fn from(id: MediaId) -> Self {
        id.0
    }
}

impl fmt::Display for MediaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Lowercases scheme and host, drops the fragment and any trailing slash.
pub fn canonicalize_url(raw: &str) -> Result<String, MediaError> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Err(MediaError::EmptySource);
    }
    let mut url = url::Url::parse(raw).map_err(|e| MediaError::InvalidUrl(raw.into(), e.to_string()))?;
    url.set_fragment(None);
    let mut s = url.to_string();
    while s.ends_with('/') && !s.ends_with("://") {
        s.pop();
    }
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum MediaSource {
    Url(String),
    LocalFile(PathBuf),
    InlineText,
}

/// Url sources hash their canonical URL; everything else hashes content.
pub fn assign_media_id(source: &MediaSource, content: &[u8]) -> Result<MediaId, MediaError> {
    match source {
        MediaSource::Url(u) => MediaId::for_url(u),
        MediaSource::LocalFile(_) | MediaSource::InlineText => MediaId::for_content(content),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MediaType {
    Html,
    PlainText,
}

impl MediaType {
    pub fn from_extension(ext: &str) -> Result<Self, MediaError> {
        match ext.to_ascii_lowercase().as_str() {
            "html" | "htm" | "xhtml" => Ok(Self::Html),
            "txt" | "text" => Ok(Self::PlainText),
            other => Err(MediaError::UnsupportedMediaType(other.to_string())),
        }
    }

    pub fn from_path(path: &Path) -> Result<Self, MediaError> {
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
        if ext.is_empty() {
            return Err(MediaError::UnsupportedMediaType(path.display().to_string()));
        }
        Self::from_extension(ext)
    }

    /// Maps an HTTP `Content-Type` value; parameters such as charset are ignored.
    pub fn from_content_type(value: &str) -> Result<Self, MediaError> {
        let essence = value.split(';').next().unwrap_or("").trim().to_ascii_lowercase();
        match essence.as_str() {
            "text/html" | "application/xhtml+xml" => Ok(Self::Html),
            "text/plain" => Ok(Self::PlainText),
            other => Err(MediaError::UnsupportedMediaType(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MediaDocument {
    pub media_id: MediaId,
    pub source: MediaSource,
    pub media_type: MediaType,
    #[serde(with = "base64_bytes")]
    pub raw: Vec<u8>,
    pub text: String,
    pub fetched_at: DateTime<Utc>,
}

impl MediaDocument {
    /// Assigns the id and extracts text. Fails when no text remains.
    pub fn process(
        source: MediaSource,
        media_type: MediaType,
        raw: Vec<u8>,
        fetched_at: DateTime<Utc>,
    ) -> Result<Self, MediaError> {
        let media_id = assign_media_id(&source, &raw)?;
        let text = extract_text(media_type, &raw)?;
        if text.is_empty() {
            return Err(MediaError::NoText);
        }
        Ok(Self { media_id, source, media_type, raw, text, fetched_at })
    }
}

mod base64_bytes {
    use base64::Engine;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bytes: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&base64::engine::general_purpose::STANDARD.encode(bytes))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let s = String::deserialize(d)?;
        base64::engine::general_purpose::STANDARD.decode(s).map_err(serde::de::Error::custom)
    }
}

/// Elements whose content never reaches the extracted text.
const DROPPED_ELEMENTS: &[&str] =
    &["footer", "head", "header", "nav", "noscript", "script", "style", "template"];

const BLOCK_ELEMENTS: &[&str] = &[
    "address", "article", "aside", "blockquote", "br", "dd", "div", "dl", "dt", "figcaption",
    "figure", "h1", "h2", "h3", "h4", "h5", "h6", "hr", "li", "main", "ol", "p", "pre", "section",
    "table", "td", "th", "tr", "ul",
];

/// Plain text of a raw document; paragraphs are separated by a single `\n`
/// and runs of whitespace inside a paragraph collapse to one space.
pub fn extract_text(media_type: MediaType, raw: &[u8]) -> Result<String, MediaError> {
    let decoded = std::str::from_utf8(raw).map_err(|e| MediaError::Decode(e.to_string()))?;
    Ok(match media_type {
        MediaType::PlainText => normalize_plain(decoded),
        MediaType::Html => html_to_text(decoded),
    })
}

fn normalize_plain(text: &str) -> String {
    let mut paragraphs = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            if !current.is_empty() {
                paragraphs.push(collapse(&current.join(" ")));
                current.clear();
            }
        } else {
            current.push(line);
        }
    }
    if !current.is_empty() {
        paragraphs.push(collapse(&current.join(" ")));
    }
    paragraphs.join("\n")
}

fn collapse(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn html_to_text(html: &str) -> String {
    let doc = Html::parse_document(html);
    let mut blocks: Vec<String> = vec![String::new()];
    walk(doc.tree.root(), &mut blocks);
    blocks.iter().map(|b| collapse(b)).filter(|b| !b.is_empty()).collect::<Vec<_>>().join("\n")
}

fn walk(node: ego_tree::NodeRef<'_, Node>, blocks: &mut Vec<String>) {
    for child in node.children() {
        match child.value() {
            Node::Text(t) => blocks.last_mut().expect("at least one block").push_str(t),
            Node::Element(e) => {
                let name = e.name();
                if DROPPED_ELEMENTS.contains(&name) {
                    continue;
                }
                let block = BLOCK_ELEMENTS.contains(&name);
                if block {
                    blocks.push(String::new());
                }
                walk(child, blocks);
                if block {
                    blocks.push(String::new());
                }
            }
            _ => walk(child, blocks),
        }
    }
}

/// Character offsets `[start, end)` into a document's text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    /// The substring covered by this span, or `None` when out of range.
    pub fn slice<'a>(&self, text: &'a str) -> Option<&'a str> {
        if self.start > self.end {
            return None;
        }
        let mut indices = text.char_indices().map(|(i, _)| i).chain(std::iter::once(text.len()));
        let start = indices.nth(self.start)?;
        let end = if self.end == self.start {
            start
        } else {
            indices.nth(self.end - self.start - 1)?
        };
        Some(&text[start..end])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub index: usize,
    pub text: String,
    pub span: Span,
}

const ABBREVIATIONS: &[&str] = &[
    "al.", "approx.", "cf.", "Dr.", "e.g.", "Eq.", "et.", "Fig.", "Figs.", "i.e.", "Jr.", "Mr.",
    "Mrs.", "Ms.", "No.", "Prof.", "Sr.", "St.", "vs.",
];

/// Splits at `.`, `!` or `?` followed by whitespace and an uppercase letter,
/// at line breaks and at end of text. Known abbreviations never end a
/// sentence.
pub fn segment_sentences(text: &str) -> Vec<Sentence> {
    let chars: Vec<char> = text.chars().collect();
    let mut sentences = Vec::new();
    let mut start: Option<usize> = None;

    let push = |start: usize, end: usize, sentences: &mut Vec<Sentence>| {
        let mut end = end;
        while end > start && chars[end - 1].is_whitespace() {
            end -= 1;
        }
        if end > start {
            sentences.push(Sentence {
                index: sentences.len(),
                text: chars[start..end].iter().collect(),
                span: Span { start, end },
            });
        }
    };

    for i in 0..chars.len() {
        let c = chars[i];
        if start.is_none() {
            if !c.is_whitespace() {
                start = Some(i);
            }
            continue;
        }
        let s = start.unwrap_or(i);
        if c == '\n' {
            push(s, i, &mut sentences);
            start = None;
        } else if matches!(c, '.' | '!' | '?') && ends_sentence(&chars, s, i) {
            push(s, i + 1, &mut sentences);
            start = None;
        }
    }
    if let Some(s) = start {
        push(s, chars.len(), &mut sentences);
    }
    sentences
}

fn ends_sentence(chars: &[char], sentence_start: usize, i: usize) -> bool {
    let mut j = i + 1;
    if j < chars.len() && !chars[j].is_whitespace() {
        return false;
    }
    while j < chars.len() && chars[j].is_whitespace() {
        if chars[j] == '\n' {
            break;
        }
        j += 1;
    }
    let next_ok = j >= chars.len() || chars[j] == '\n' || chars[j].is_uppercase();
    if !next_ok {
        return false;
    }
    if chars[i] != '.' {
        return true;
    }
    let mut w = i;
    while w > sentence_start && !chars[w - 1].is_whitespace() {
        w -= 1;
    }
    let word: String = chars[w..=i].iter().collect();
    !ABBREVIATIONS.contains(&word.as_str())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn url_canonicalization() {
        assert_eq!(MediaId::for_url("https://Ex.org/a/").unwrap(), MediaId::for_url("https://ex.org/a").unwrap());
        assert_eq!(
            MediaId::for_url("HTTPS://EX.org/a#frag").unwrap(),
            MediaId::for_url("https://ex.org/a").unwrap()
        );
        assert_ne!(MediaId::for_url("https://ex.org/a").unwrap(), MediaId::for_url("https://ex.org/b").unwrap());
        assert_eq!(canonicalize_url("https://Ex.org/").unwrap(), "https://ex.org");
        assert_eq!(MediaId::for_url(""), Err(MediaError::EmptySource));
    }

    #[test]
    fn content_ids_are_deterministic() {
        let a = assign_media_id(&MediaSource::InlineText, b"same text").unwrap();
        let b = assign_media_id(&MediaSource::InlineText, b"same text").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.as_str().len(), 16);
        assert_eq!(assign_media_id(&MediaSource::InlineText, b""), Err(MediaError::EmptySource));
    }

    #[test]
    fn media_id_parsing() {
        assert!("0123456789abcdef".parse::<MediaId>().is_ok());
        assert!("0123456789ABCDEF".parse::<MediaId>().is_err());
        assert!("short".parse::<MediaId>().is_err());
    }

    #[test]
    fn html_entities_and_tags() {
        assert_eq!(extract_text(MediaType::Html, b"<p>CO2 &amp; heat</p>").unwrap(), "CO2 & heat");
    }

    #[test]
    fn html_drops_navigation_noise() {
        let html = br#"<html><head><title>T</title><script>var x = 1;</script></head>
<body><nav><a href="/es">En espa&ntilde;ol</a></nav><header>Site</header>
<p>First   para.</p><div>Second <b>para</b>.</div><footer>(c)</footer></body></html>"#;
        let text = extract_text(MediaType::Html, html).unwrap();
        assert_eq!(text, "First para.\nSecond para.");
        assert!(!text.contains("español"));
    }

    #[test]
    fn plain_text_whitespace() {
        assert_eq!(extract_text(MediaType::PlainText, b"a  b\n\nc").unwrap(), "a b\nc");
        assert_eq!(extract_text(MediaType::PlainText, b"wrapped\nline").unwrap(), "wrapped line");
    }

    #[test]
    fn invalid_utf8() {
        assert!(matches!(extract_text(MediaType::PlainText, &[0xff, 0xfe]), Err(MediaError::Decode(_))));
    }

    #[test]
    fn unsupported_types_are_named() {
        assert_eq!(
            MediaType::from_path(Path::new("report.pdf")),
            Err(MediaError::UnsupportedMediaType("pdf".into()))
        );
        assert_eq!(
            MediaType::from_extension("mp3"),
            Err(MediaError::UnsupportedMediaType("mp3".into()))
        );
        assert_eq!(MediaType::from_content_type("text/html; charset=utf-8"), Ok(MediaType::Html));
    }

    #[test]
    fn two_sentences_with_spans() {
        let s = segment_sentences("It warms. Seas rise.");
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].span, Span { start: 0, end: 9 });
        assert_eq!(s[1].span, Span { start: 10, end: 20 });
        assert_eq!(s[1].text, "Seas rise.");
    }

    #[test]
    fn empty_and_abbreviations() {
        assert!(segment_sentences("").is_empty());
        assert!(segment_sentences("   \n ").is_empty());
        assert_eq!(segment_sentences("See Fig. 3 for details.").len(), 1);
        assert_eq!(segment_sentences("Ask Dr. Smith. He knows.").len(), 2);
        assert_eq!(segment_sentences("Values rose, e.g. Arctic ones.").len(), 1);
    }

    #[test]
    fn line_breaks_end_sentences() {
        let s = segment_sentences("Heading\nBody text here. More");
        let texts: Vec<_> = s.iter().map(|s| s.text.as_str()).collect();
        assert_eq!(texts, ["Heading", "Body text here.", "More"]);
    }

    #[test]
    fn spans_slice_multibyte_text() {
        let text = "Él calienta. Ça monte.";
        for s in segment_sentences(text) {
            assert_eq!(s.span.slice(text), Some(s.text.as_str()));
        }
    }
}
