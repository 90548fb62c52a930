use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TermError {
    #[error("IRI must not be empty")]
    EmptyIri,
    #[error("IRI `{0}` contains whitespace")]
    WhitespaceInIri(String),
    #[error("{0} must be an IRI, found literal")]
    LiteralInIriPosition(&'static str),
}

/// A graph node or edge label.
///
/// In JSON an IRI is a bare string and a literal is `{"literal": "..."}`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "TermRepr", into = "TermRepr")]
pub enum Term {
    Iri(String),
    Literal(String),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum TermRepr {
    Iri(String),
    Literal { literal: String },
}

impl TryFrom<TermRepr> for Term {
    type Error = TermError;

    fn try_from(repr: TermRepr) -> Result<Self, Self::Error> {
        match repr {
            TermRepr::Iri(iri) => Term::iri(iri),
            TermRepr::Literal { literal } => Ok(Term::Literal(literal)),
        }
    }
}

impl From<Term> for TermRepr {
    fn from(term: Term) -> Self {
        match term {
            Term::Iri(iri) => TermRepr::Iri(iri),
            Term::Literal(literal) => TermRepr::Literal { literal },
        }
    }
}

impl Term {
    pub fn iri(value: impl Into<String>) -> Result<Self, TermError> {
        let value = value.into();
        if value.is_empty() {
            return Err(TermError::EmptyIri);
        }
        if value.chars().any(char::is_whitespace) {
            return Err(TermError::WhitespaceInIri(value));
        }
        Ok(Term::Iri(value))
    }

    pub fn literal(value: impl Into<String>) -> Self {
        Term::Literal(value.into())
    }

    pub fn value(&self) -> &str {
        match self {
            Term::Iri(v) | Term::Literal(v) => v,
        }
    }

    pub fn is_iri(&self) -> bool {
        matches!(self, Term::Iri(_))
    }

    /// Last path or fragment segment of an IRI; literals return their text.
    pub fn local_name(&self) -> &str {
        match self {
            Term::Iri(v) => v.rsplit(['/', '#']).next().unwrap_or(v),
            Term::Literal(v) => v,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(v) => write!(f, "<{v}>"),
            Term::Literal(v) => write!(f, "\"{}\"", escape_literal(v)),
        }
    }
}

pub(crate) fn escape_literal(value: &str) -> String {
    let mut out = String::with_capacity(value.len());
    for c in value.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out
}

/// Subject-predicate-object statement. Subject and predicate are always IRIs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "TripleRepr")]
pub struct Triple {
    subject: Term,
    predicate: Term,
    object: Term,
}

#[derive(Deserialize)]
struct TripleRepr {
    subject: Term,
    predicate: Term,
    object: Term,
}

impl TryFrom<TripleRepr> for Triple {
    type Error = TermError;

    fn try_from(r: TripleRepr) -> Result<Self, Self::Error> {
        Triple::new(r.subject, r.predicate, r.object)
    }
}

impl Triple {
    pub fn new(subject: Term, predicate: Term, object: Term) -> Result<Self, TermError> {
        if !subject.is_iri() {
            return Err(TermError::LiteralInIriPosition("subject"));
        }
        if !predicate.is_iri() {
            return Err(TermError::LiteralInIriPosition("predicate"));
        }
        Ok(Self { subject, predicate, object })
    }

    /// Convenience constructor for three IRIs.
    pub fn iris(s: &str, p: &str, o: &str) -> Result<Self, TermError> {
        Self::new(Term::iri(s)?, Term::iri(p)?, Term::iri(o)?)
    }

    pub fn subject(&self) -> &Term {
        &self.subject
    }

    pub fn predicate(&self) -> &Term {
        &self.predicate
    }

    pub fn object(&self) -> &Term {
        &self.object
    }

    pub fn with_predicate(&self, predicate: Term) -> Result<Self, TermError> {
        Self::new(self.subject.clone(), predicate, self.object.clone())
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}

/// Prefix label (without the colon, `""` for the default prefix) to IRI base.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PrefixTable(BTreeMap<String, String>);

impl PrefixTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, prefix: impl Into<String>, base: impl Into<String>) {
        self.0.insert(prefix.into(), base.into());
    }

    pub fn get(&self, prefix: &str) -> Option<&str> {
        self.0.get(prefix).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn extend(&mut self, other: &PrefixTable) {
        for (k, v) in other.iter() {
            self.insert(k, v);
        }
    }

    /// Expands `prefix:local`; returns `None` when the prefix is unknown or the
    /// input is not a prefixed name.
    pub fn expand(&self, name: &str) -> Option<String> {
        let (prefix, local) = name.split_once(':')?;
        if local.starts_with("//") {
            return None;
        }
        self.get(prefix).map(|base| format!("{base}{local}"))
    }

    /// Shortest `prefix:local` form of `iri` whose local part needs no escaping.
    pub fn compact(&self, iri: &str) -> Option<String> {
        self.0
            .iter()
            .filter(|(_, base)| !base.is_empty() && iri.starts_with(base.as_str()))
            .filter_map(|(prefix, base)| {
                let local = &iri[base.len()..];
                is_plain_local(local).then(|| format!("{prefix}:{local}"))
            })
            .min_by_key(|s| (s.len(), s.clone()))
    }
}

fn is_plain_local(local: &str) -> bool {
    let mut chars = local.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphanumeric() || c == '_' => {}
        _ => return false,
    }
    local.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iri_validation() {
        assert_eq!(Term::iri(""), Err(TermError::EmptyIri));
        assert!(matches!(Term::iri("http://a b"), Err(TermError::WhitespaceInIri(_))));
        assert!(Term::iri("http://ex/a").is_ok());
    }

    #[test]
    fn literal_keeps_exact_text() {
        let t = Term::literal("  Spaced \"text\" ");
        assert_eq!(t.value(), "  Spaced \"text\" ");
    }

    #[test]
    fn literal_subject_rejected() {
        let err = Triple::new(Term::literal("x"), Term::iri("http://p").unwrap(), Term::literal("y"));
        assert_eq!(err, Err(TermError::LiteralInIriPosition("subject")));
    }

    #[test]
    fn term_json_shape() {
        let iri = Term::iri("http://ex/a").unwrap();
        assert_eq!(serde_json::to_string(&iri).unwrap(), "\"http://ex/a\"");
        let lit = Term::literal("42");
        assert_eq!(serde_json::to_string(&lit).unwrap(), r#"{"literal":"42"}"#);
        let back: Term = serde_json::from_str(r#"{"literal":"42"}"#).unwrap();
        assert_eq!(back, lit);
        assert!(serde_json::from_str::<Term>("\"has space\"").is_err());
    }

    #[test]
    fn prefix_expand_and_compact() {
        let mut p = PrefixTable::new();
        p.insert("", "http://ex/");
        p.insert("rdf", "http://www.w3.org/1999/02/22-rdf-syntax-ns#");
        assert_eq!(p.expand(":a").as_deref(), Some("http://ex/a"));
        assert_eq!(p.expand("zz:a"), None);
        assert_eq!(p.compact("http://ex/global_warming").as_deref(), Some(":global_warming"));
        assert_eq!(p.compact(RDF_TYPE).as_deref(), Some("rdf:type"));
        assert_eq!(p.compact("http://ex/a.b"), None);
        assert_eq!(p.compact("http://other/a"), None);
    }
}
