//! Embedded triple store holding the trusted ground truth.
//!
//! Every stored triple carries a [`StatementAnnotation`]. Subject, predicate
//! and object indexes are kept in lock-step with the triple set; the subject
//! index doubles as the outgoing-edge list of a node and the object index as
//! its incoming-edge list.

mod sidecar;
mod term;
mod turtle;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::media::MediaId;

pub use sidecar::{read_sidecar, write_sidecar, SidecarEntry, SidecarError};
pub use term::{PrefixTable, Term, TermError, Triple, RDF_TYPE};
pub use turtle::{parse_turtle, serialize_turtle, write_turtle, TurtleError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KgError {
    #[error("invalid annotation: {0}")]
    InvalidAnnotation(String),
    #[error("negation map entry `{0}` is not an IRI")]
    InvalidNegation(String),
    #[error("negation map is not symmetric: `{0}` maps to both `{1}` and `{2}`")]
    ConflictingNegation(String, String, String),
}

/// Statement-level metadata for a stored triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatementAnnotation {
    pub media_ids: Vec<MediaId>,
    pub confidence: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objectivity: Option<f64>,
    pub asserted_at: DateTime<Utc>,
    #[serde(default)]
    pub source_refs: Vec<String>,
}

impl StatementAnnotation {
    pub fn new(media_ids: Vec<MediaId>, confidence: f64, asserted_at: DateTime<Utc>) -> Self {
        let mut a = Self { media_ids, confidence, objectivity: None, asserted_at, source_refs: Vec::new() };
        a.canonicalize();
        a
    }

    pub fn with_source_refs(mut self, refs: impl IntoIterator<Item = String>) -> Self {
        self.source_refs.extend(refs);
        self.canonicalize();
        self
    }

    pub fn validate(&self) -> Result<(), KgError> {
        if self.media_ids.is_empty() {
            return Err(KgError::InvalidAnnotation("media_ids must not be empty".into()));
        }
        if !(0.0..=1.0).contains(&self.confidence) {
            return Err(KgError::InvalidAnnotation(format!(
                "confidence {} outside [0, 1]",
                self.confidence
            )));
        }
        if let Some(o) = self.objectivity {
            if !(0.0..=1.0).contains(&o) {
                return Err(KgError::InvalidAnnotation(format!("objectivity {o} outside [0, 1]")));
            }
        }
        Ok(())
    }

    /// Union of ids and references, max of scores, newest timestamp.
    /// Commutative, associative and idempotent.
    pub fn merge(&mut self, other: &StatementAnnotation) {
        self.media_ids.extend(other.media_ids.iter().cloned());
        self.source_refs.extend(other.source_refs.iter().cloned());
        self.confidence = self.confidence.max(other.confidence);
        self.objectivity = match (self.objectivity, other.objectivity) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
        self.asserted_at = self.asserted_at.max(other.asserted_at);
        self.canonicalize();
    }

    fn canonicalize(&mut self) {
        self.media_ids.sort();
        self.media_ids.dedup();
        self.source_refs.sort();
        self.source_refs.dedup();
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InsertOutcome {
    Inserted,
    Merged,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegreeDirection {
    In,
    Out,
    Both,
}

/// Direction of an incident edge as seen from the queried node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeDirection {
    In,
    Out,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Neighbor {
    pub edge: Triple,
    pub other: Term,
    pub direction: EdgeDirection,
}

#[derive(Debug, Clone, Default)]
pub struct KnowledgeGraph {
    triples: BTreeSet<Triple>,
    annotations: BTreeMap<Triple, StatementAnnotation>,
    prefixes: PrefixTable,
    negations: BTreeMap<Term, Term>,
    by_subject: HashMap<Term, BTreeSet<Triple>>,
    by_predicate: HashMap<Term, BTreeSet<Triple>>,
    by_object: HashMap<Term, BTreeSet<Triple>>,
}

impl PartialEq for KnowledgeGraph {
    fn eq(&self, other: &Self) -> bool {
        self.triples == other.triples
            && self.annotations == other.annotations
            && self.prefixes == other.prefixes
            && self.negations == other.negations
    }
}

impl KnowledgeGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn triples(&self) -> &BTreeSet<Triple> {
        &self.triples
    }

    pub fn annotations(&self) -> &BTreeMap<Triple, StatementAnnotation> {
        &self.annotations
    }

    pub fn annotation(&self, triple: &Triple) -> Option<&StatementAnnotation> {
        self.annotations.get(triple)
    }

    pub fn prefixes(&self) -> &PrefixTable {
        &self.prefixes
    }

    pub fn add_prefixes(&mut self, prefixes: &PrefixTable) {
        self.prefixes.extend(prefixes);
    }

    pub fn negations(&self) -> &BTreeMap<Term, Term> {
        &self.negations
    }

    /// Declares `a` and `b` as mutually negating predicates.
    pub fn add_negation(&mut self, a: Term, b: Term) -> Result<(), KgError> {
        for t in [&a, &b] {
            if !t.is_iri() {
                return Err(KgError::InvalidNegation(t.value().to_string()));
            }
        }
        for (from, to) in [(&a, &b), (&b, &a)] {
            if let Some(existing) = self.negations.get(from) {
                if existing != to {
                    return Err(KgError::ConflictingNegation(
                        from.value().into(),
                        existing.value().into(),
                        to.value().into(),
                    ));
                }
            }
        }
        self.negations.insert(a.clone(), b.clone());
        self.negations.insert(b, a);
        Ok(())
    }

    pub fn negation_of(&self, predicate: &Term) -> Option<&Term> {
        self.negations.get(predicate)
    }

    /// Adds `triple` or merges `annotation` into the existing entry.
    pub fn insert(
        &mut self,
        triple: Triple,
        annotation: StatementAnnotation,
    ) -> Result<InsertOutcome, KgError> {
        annotation.validate()?;
        if let Some(existing) = self.annotations.get_mut(&triple) {
            existing.merge(&annotation);
            return Ok(InsertOutcome::Merged);
        }
        let mut annotation = annotation;
        annotation.canonicalize();
        for (index, key) in [
            (&mut self.by_subject, triple.subject()),
            (&mut self.by_predicate, triple.predicate()),
            (&mut self.by_object, triple.object()),
        ] {
            index.entry(key.clone()).or_default().insert(triple.clone());
        }
        self.annotations.insert(triple.clone(), annotation);
        self.triples.insert(triple);
        Ok(InsertOutcome::Inserted)
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.triples.contains(triple)
    }

    pub fn outgoing(&self, node: &Term) -> impl Iterator<Item = &Triple> {
        self.by_subject.get(node).into_iter().flatten()
    }

    pub fn incoming(&self, node: &Term) -> impl Iterator<Item = &Triple> {
        self.by_object.get(node).into_iter().flatten()
    }

    pub fn with_predicate(&self, predicate: &Term) -> impl Iterator<Item = &Triple> {
        self.by_predicate.get(predicate).into_iter().flatten()
    }

    pub fn degree(&self, node: &Term, direction: DegreeDirection) -> usize {
        let count = |index: &HashMap<Term, BTreeSet<Triple>>| index.get(node).map_or(0, BTreeSet::len);
        match direction {
            DegreeDirection::In => count(&self.by_object),
            DegreeDirection::Out => count(&self.by_subject),
            DegreeDirection::Both => count(&self.by_object) + count(&self.by_subject),
        }
    }

    /// All incident edges of `node`, sorted.
    pub fn neighbors(&self, node: &Term) -> Vec<Neighbor> {
        let mut out: Vec<Neighbor> = self
            .incoming(node)
            .map(|t| Neighbor { edge: t.clone(), other: t.subject().clone(), direction: EdgeDirection::In })
            .chain(self.outgoing(node).map(|t| Neighbor {
                edge: t.clone(),
                other: t.object().clone(),
                direction: EdgeDirection::Out,
            }))
            .collect();
        out.sort();
        out
    }

    /// Distinct subjects and objects.
    pub fn nodes(&self) -> BTreeSet<&Term> {
        self.triples.iter().flat_map(|t| [t.subject(), t.object()]).collect()
    }

    pub fn node_count(&self) -> usize {
        self.nodes().len()
    }

    /// True when every index agrees with the triple set.
    pub fn is_coherent(&self) -> bool {
        let check = |index: &HashMap<Term, BTreeSet<Triple>>, key: fn(&Triple) -> &Term| {
            let total: usize = index.values().map(BTreeSet::len).sum();
            total == self.triples.len()
                && index.iter().all(|(k, ts)| {
                    !ts.is_empty() && ts.iter().all(|t| key(t) == k && self.triples.contains(t))
                })
        };
        check(&self.by_subject, Triple::subject)
            && check(&self.by_predicate, Triple::predicate)
            && check(&self.by_object, Triple::object)
            && self.annotations.len() == self.triples.len()
            && self.annotations.keys().all(|t| self.triples.contains(t))
    }

    /// Resolves `<iri>`, an absolute IRI or a prefixed name against this
    /// graph's prefixes.
    pub fn resolve_name(&self, name: &str) -> Option<Term> {
        let name = name.trim();
        if let Some(inner) = name.strip_prefix('<').and_then(|n| n.strip_suffix('>')) {
            return Term::iri(inner).ok();
        }
        if crate::align::is_absolute_iri(name) {
            return Term::iri(name).ok();
        }
        self.prefixes.expand(name).and_then(|iri| Term::iri(iri).ok())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn mid(s: &str) -> MediaId {
        MediaId::for_content(s.as_bytes()).unwrap()
    }

    fn ann(media: &str, confidence: f64) -> StatementAnnotation {
        StatementAnnotation::new(vec![mid(media)], confidence, Utc.timestamp_opt(1_700_000_000, 0).unwrap())
    }

    fn fixture() -> KnowledgeGraph {
        let mut g = KnowledgeGraph::new();
        for (s, p, o) in [
            ("co2_concentration", "causes", "global_warming"),
            ("global_warming", "causes", "sea_level_rise"),
            ("human_activity", "increases", "co2_concentration"),
        ] {
            let t = Triple::iris(&format!("http://ex/{s}"), &format!("http://ex/{p}"), &format!("http://ex/{o}"))
                .unwrap();
            g.insert(t, ann("gt", 1.0)).unwrap();
        }
        g
    }

    fn node(n: &str) -> Term {
        Term::iri(format!("http://ex/{n}")).unwrap()
    }

    #[test]
    fn insert_updates_degrees() {
        let mut g = KnowledgeGraph::new();
        let t = Triple::iris("http://ex/a", "http://ex/p", "http://ex/b").unwrap();
        assert_eq!(g.insert(t, ann("m", 0.5)).unwrap(), InsertOutcome::Inserted);
        assert_eq!(g.degree(&node("a"), DegreeDirection::Both), 1);
        assert_eq!(g.degree(&node("b"), DegreeDirection::Both), 1);
        assert!(g.is_coherent());
    }

    #[test]
    fn duplicate_insert_merges_annotations() {
        let mut g = KnowledgeGraph::new();
        let t = Triple::iris("http://ex/a", "http://ex/p", "http://ex/b").unwrap();
        g.insert(t.clone(), ann("m1", 0.4)).unwrap();
        let mut second = ann("m2", 0.9);
        second.asserted_at = Utc.timestamp_opt(1_800_000_000, 0).unwrap();
        assert_eq!(g.insert(t.clone(), second).unwrap(), InsertOutcome::Merged);
        let a = g.annotation(&t).unwrap();
        let mut expected = vec![mid("m1"), mid("m2")];
        expected.sort();
        assert_eq!(a.media_ids, expected);
        assert_eq!(a.confidence, 0.9);
        assert_eq!(a.asserted_at.timestamp(), 1_800_000_000);
        assert_eq!(g.len(), 1);
    }

    #[test]
    fn out_of_range_confidence_rejected() {
        let mut g = KnowledgeGraph::new();
        let t = Triple::iris("http://ex/a", "http://ex/p", "http://ex/b").unwrap();
        assert!(matches!(g.insert(t.clone(), ann("m", 1.2)), Err(KgError::InvalidAnnotation(_))));
        let mut empty = ann("m", 0.5);
        empty.media_ids.clear();
        assert!(matches!(g.insert(t, empty), Err(KgError::InvalidAnnotation(_))));
        assert!(g.is_empty());
    }

    #[test]
    fn contains_on_fixture() {
        let g = fixture();
        let member = Triple::iris("http://ex/co2_concentration", "http://ex/causes", "http://ex/global_warming").unwrap();
        let other = Triple::iris("http://ex/co2_concentration", "http://ex/causes", "http://ex/sea_level_rise").unwrap();
        assert!(g.contains(&member));
        assert!(!g.contains(&other));
        assert!(!KnowledgeGraph::new().contains(&member));
    }

    #[test]
    fn degrees_on_fixture() {
        let g = fixture();
        assert_eq!(g.degree(&node("global_warming"), DegreeDirection::Both), 2);
        assert_eq!(g.degree(&node("global_warming"), DegreeDirection::In), 1);
        assert_eq!(g.degree(&node("nowhere"), DegreeDirection::Both), 0);
    }

    #[test]
    fn neighbors_on_fixture() {
        let g = fixture();
        assert_eq!(g.neighbors(&node("global_warming")).len(), 2);
        assert!(g.neighbors(&node("nowhere")).is_empty());
        let co2 = g.neighbors(&node("co2_concentration"));
        assert_eq!(co2.len(), 2);
        assert_eq!(co2[0].direction, EdgeDirection::Out);
        assert_eq!(co2[0].other, node("global_warming"));
        assert_eq!(co2[1].direction, EdgeDirection::In);
        assert_eq!(co2[1].other, node("human_activity"));
    }

    #[test]
    fn negation_map_is_symmetric() {
        let mut g = KnowledgeGraph::new();
        g.add_negation(node("causes"), node("does_not_cause")).unwrap();
        assert_eq!(g.negation_of(&node("does_not_cause")), Some(&node("causes")));
        assert_eq!(g.negation_of(&node("causes")), Some(&node("does_not_cause")));
        assert!(matches!(
            g.add_negation(node("causes"), node("prevents")),
            Err(KgError::ConflictingNegation(..))
        ));
        assert!(g.add_negation(node("causes"), node("does_not_cause")).is_ok());
    }

    #[test]
    fn resolve_names() {
        let mut g = KnowledgeGraph::new();
        let mut p = PrefixTable::new();
        p.insert("", "http://ex/");
        g.add_prefixes(&p);
        assert_eq!(g.resolve_name(":a"), Some(node("a")));
        assert_eq!(g.resolve_name("<http://ex/a>"), Some(node("a")));
        assert_eq!(g.resolve_name("http://ex/a"), Some(node("a")));
        assert_eq!(g.resolve_name("plain words"), None);
    }
}
