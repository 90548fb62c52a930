//! Normalization of raw phrases into canonical graph terms.
//!
//! A phrase is case-folded, tokenized, reduced to base forms through the
//! lemma table and rewritten through the synonym table (longest surface match
//! first). Subjects and objects then go through the ontology map and
//! predicates through the predicate table; anything unmapped falls back to a
//! slug under the default namespace.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::extraction::CandidateTriple;
use crate::kg::{Term, Triple};
use crate::text;

pub const DEFAULT_NAMESPACE: &str = "http://example.org/kg/";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlignError {
    #[error("cannot read table file: {0}")]
    Io(String),
    #[error("table parse error: {0}")]
    TableParse(String),
    #[error("surface form `{surface}` is claimed by several canonical phrases: {canonicals:?}")]
    AmbiguousSynonym { surface: String, canonicals: Vec<String> },
}

/// On-disk layout of the alignment table file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TableFile {
    #[serde(default)]
    pub lemmas: BTreeMap<String, String>,
    #[serde(default)]
    pub synonyms: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub predicates: BTreeMap<String, String>,
    #[serde(default)]
    pub ontology: BTreeMap<String, String>,
    #[serde(default)]
    pub default_namespace: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TableCounts {
    pub lemmas: usize,
    pub canonical_phrases: usize,
    pub surface_forms: usize,
    pub predicates: usize,
    pub ontology: usize,
}

/// Immutable lookup tables; safe to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentTables {
    lemmas: BTreeMap<String, String>,
    synonyms: BTreeMap<String, BTreeSet<String>>,
    surfaces: BTreeMap<Vec<String>, Vec<String>>,
    max_surface_len: usize,
    predicates: BTreeMap<String, Term>,
    ontology: BTreeMap<String, Term>,
    default_namespace: String,
}

impl Default for AlignmentTables {
    fn default() -> Self {
        Self {
            lemmas: BTreeMap::new(),
            synonyms: BTreeMap::new(),
            surfaces: BTreeMap::new(),
            max_surface_len: 0,
            predicates: BTreeMap::new(),
            ontology: BTreeMap::new(),
            default_namespace: DEFAULT_NAMESPACE.to_string(),
        }
    }
}

/// Reads and validates a table file. An empty file yields empty tables.
pub fn load_tables(path: impl AsRef<Path>) -> Result<AlignmentTables, AlignError> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| AlignError::Io(format!("{}: {e}", path.as_ref().display())))?;
    AlignmentTables::from_json(&text)
}

impl AlignmentTables {
    pub fn from_json(text: &str) -> Result<Self, AlignError> {
        if text.trim().is_empty() {
            return Ok(Self::default());
        }
        let file: TableFile = serde_json::from_str(text).map_err(|e| AlignError::TableParse(e.to_string()))?;
        Self::from_table_file(file)
    }

    pub fn from_table_file(file: TableFile) -> Result<Self, AlignError> {
        let mut tables = Self::default();
        if let Some(ns) = file.default_namespace {
            if !is_absolute_iri(&ns) {
                return Err(AlignError::TableParse(format!("default_namespace `{ns}` is not an absolute IRI")));
            }
            tables.default_namespace = ns;
        }
        tables.lemmas = resolve_lemmas(&file.lemmas)?;

        let canonicals: BTreeMap<Vec<String>, String> = file
            .synonyms
            .keys()
            .map(|c| {
                let toks = tables.lemmatize(c);
                (toks.clone(), toks.join(" "))
            })
            .collect();
        let mut claims: BTreeMap<Vec<String>, BTreeSet<String>> = BTreeMap::new();
        for (canonical, surfaces) in &file.synonyms {
            let canonical_toks = tables.lemmatize(canonical);
            if canonical_toks.is_empty() {
                return Err(AlignError::TableParse(format!("empty canonical phrase `{canonical}`")));
            }
            let canonical_norm = canonical_toks.join(" ");
            tables.synonyms.entry(canonical_norm.clone()).or_default();
            for surface in surfaces {
                let toks = tables.lemmatize(surface);
                if toks.is_empty() {
                    return Err(AlignError::TableParse(format!("empty surface form under `{canonical}`")));
                }
                if toks == canonical_toks {
                    continue;
                }
                claims.entry(toks.clone()).or_default().insert(canonical_norm.clone());
                if let Some(other) = canonicals.get(&toks) {
                    claims.entry(toks.clone()).or_default().insert(other.clone());
                }
                tables.synonyms.entry(canonical_norm.clone()).or_default().insert(toks.join(" "));
            }
        }
        for (toks, owners) in claims {
            if owners.len() > 1 {
                return Err(AlignError::AmbiguousSynonym {
                    surface: toks.join(" "),
                    canonicals: owners.into_iter().collect(),
                });
            }
            let canonical = owners.into_iter().next().expect("one owner");
            tables.max_surface_len = tables.max_surface_len.max(toks.len());
            tables.surfaces.insert(toks, canonical.split(' ').map(str::to_string).collect());
        }

        for (surface, iri) in &file.predicates {
            let key = tables.normalize_phrase(surface);
            tables.predicates.insert(key, iri_term(iri, "predicate")?);
        }
        for (phrase, iri) in &file.ontology {
            let key = tables.normalize_phrase(phrase);
            tables.ontology.insert(key, iri_term(iri, "ontology")?);
        }
        Ok(tables)
    }

    pub fn default_namespace(&self) -> &str {
        &self.default_namespace
    }

    pub fn counts(&self) -> TableCounts {
        TableCounts {
            lemmas: self.lemmas.len(),
            canonical_phrases: self.synonyms.len(),
            surface_forms: self.surfaces.len(),
            predicates: self.predicates.len(),
            ontology: self.ontology.len(),
        }
    }

    /// Base form of a single lowercase token.
    pub fn lemma<'a>(&'a self, token: &'a str) -> &'a str {
        self.lemmas.get(token).map_or(token, String::as_str)
    }

    /// Lowercased, lemmatized tokens of `raw`.
    pub fn lemmatize(&self, raw: &str) -> Vec<String> {
        text::tokens(raw).into_iter().map(|t| self.lemma(&t).to_string()).collect()
    }

    /// Canonical text of a phrase. Idempotent.
    pub fn normalize_phrase(&self, raw: &str) -> String {
        let mut toks = self.lemmatize(raw);
        // Each rewrite can expose a new surface match; bounded fixpoint.
        for _ in 0..=toks.len() {
            let next = self.rewrite_synonyms(&toks);
            if next == toks {
                break;
            }
            toks = next;
        }
        toks.join(" ")
    }

    fn rewrite_synonyms(&self, toks: &[String]) -> Vec<String> {
        let mut out = Vec::with_capacity(toks.len());
        let mut i = 0;
        'outer: while i < toks.len() {
            let longest = self.max_surface_len.min(toks.len() - i);
            for len in (1..=longest).rev() {
                if let Some(canonical) = self.surfaces.get(&toks[i..i + len]) {
                    out.extend(canonical.iter().cloned());
                    i += len;
                    continue 'outer;
                }
            }
            out.push(toks[i].clone());
            i += 1;
        }
        out
    }

    /// Subject/object alignment: absolute IRIs pass through, then the
    /// ontology map, then the slug fallback.
    pub fn align_node(&self, raw: &str) -> Term {
        let raw = raw.trim();
        if is_absolute_iri(raw) {
            if let Ok(t) = Term::iri(raw) {
                return t;
            }
        }
        let phrase = self.normalize_phrase(raw);
        self.ontology.get(&phrase).cloned().unwrap_or_else(|| self.slug_term(&phrase))
    }

    pub fn align_predicate(&self, raw: &str) -> Term {
        let raw = raw.trim();
        if is_absolute_iri(raw) {
            if let Ok(t) = Term::iri(raw) {
                return t;
            }
        }
        let phrase = self.normalize_phrase(raw);
        self.predicates.get(&phrase).cloned().unwrap_or_else(|| self.slug_term(&phrase))
    }

    fn slug_term(&self, phrase: &str) -> Term {
        let slug = text::slugify(phrase);
        let local = if slug.is_empty() { "_" } else { slug.as_str() };
        Term::Iri(format!("{}{local}", self.default_namespace))
    }
}

/// Total: every filtered candidate aligns to a valid triple.
pub fn align_triple(candidate: &CandidateTriple, tables: &AlignmentTables) -> Triple {
    Triple::new(
        tables.align_node(&candidate.raw_subject),
        tables.align_predicate(&candidate.raw_predicate),
        tables.align_node(&candidate.raw_object),
    )
    .expect("aligned subject and predicate are IRIs")
}

/// `scheme://...` or `urn:...` without whitespace.
pub fn is_absolute_iri(s: &str) -> bool {
    let Some((scheme, rest)) = s.split_once(':') else {
        return false;
    };
    let scheme_ok = scheme.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
        && scheme.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'));
    scheme_ok
        && !rest.is_empty()
        && !s.chars().any(char::is_whitespace)
        && (rest.starts_with("//") || scheme.eq_ignore_ascii_case("urn"))
}

fn iri_term(iri: &str, what: &str) -> Result<Term, AlignError> {
    if !is_absolute_iri(iri) {
        return Err(AlignError::TableParse(format!("{what} value `{iri}` is not an absolute IRI")));
    }
    Term::iri(iri).map_err(|e| AlignError::TableParse(e.to_string()))
}

fn resolve_lemmas(raw: &BTreeMap<String, String>) -> Result<BTreeMap<String, String>, AlignError> {
    let lowered: BTreeMap<String, String> =
        raw.iter().map(|(k, v)| (k.to_lowercase(), v.to_lowercase())).collect();
    let mut out = BTreeMap::new();
    for key in lowered.keys() {
        let mut current = key;
        let mut steps = 0;
        while let Some(next) = lowered.get(current) {
            if next == current {
                break;
            }
            current = next;
            steps += 1;
            if steps > lowered.len() {
                return Err(AlignError::TableParse(format!("lemma cycle through `{key}`")));
            }
        }
        if current != key {
            out.insert(key.clone(), current.clone());
        }
    }
    Ok(out)
}
