//! Independent reference implementations used by the property tests.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use chrono::{TimeZone, Utc};
use factcheck_core::kg::parse_turtle;
use factcheck_core::{KnowledgeGraph, MediaId, StatementAnnotation, Term, Triple};

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixtures_dir().join(name)).unwrap()
}

pub fn annotation() -> StatementAnnotation {
    StatementAnnotation::new(
        vec![MediaId::for_content(b"oracle").unwrap()],
        1.0,
        Utc.timestamp_opt(1_700_000_000, 0).unwrap(),
    )
}

pub fn graph_of(triples: impl IntoIterator<Item = Triple>) -> KnowledgeGraph {
    let mut g = KnowledgeGraph::new();
    for t in triples {
        g.insert(t, annotation()).unwrap();
    }
    g
}

pub fn ground_truth() -> KnowledgeGraph {
    let (triples, prefixes) = parse_turtle(&fixture("ground_truth.ttl"), None).unwrap();
    let mut g = graph_of(triples);
    g.add_prefixes(&prefixes);
    g
}

/// Stored triples as plain strings so the oracle does not share graph code.
pub struct PlainGraph {
    pub edges: Vec<(String, String, String)>,
}

impl PlainGraph {
    pub fn new(triples: &[Triple]) -> Self {
        Self {
            edges: triples
                .iter()
                .map(|t| (t.subject().value().into(), t.predicate().value().into(), t.object().value().into()))
                .collect(),
        }
    }

    pub fn degree(&self, node: &str, lambda: f64) -> f64 {
        let incoming = self.edges.iter().filter(|e| e.2 == node).count() as f64;
        let outgoing = self.edges.iter().filter(|e| e.0 == node).count() as f64;
        (lambda * incoming + outgoing).max(1.0)
    }
}

/// Best proximity over every simple path of at most `max_hops` edges from
/// `s` to `o`, ignoring direction and the claim edge itself. `None` when no
/// such path exists.
pub fn brute_force_proximity(g: &PlainGraph, claim: (&str, &str, &str), max_hops: usize, lambda: f64) -> Option<f64> {
    let (s, p, o) = claim;
    let usable: Vec<&(String, String, String)> =
        g.edges.iter().filter(|e| !(e.0 == s && e.1 == p && e.2 == o)).collect();
    let mut best: Option<f64> = None;
    let mut path = vec![s.to_string()];
    fn walk(
        g: &PlainGraph,
        usable: &[&(String, String, String)],
        target: &str,
        max_hops: usize,
        lambda: f64,
        path: &mut Vec<String>,
        best: &mut Option<f64>,
    ) {
        let here = path.last().unwrap().clone();
        if here == target {
            let interior = &path[1..path.len() - 1];
            let mut sum = 0.0;
            for v in interior {
                sum += g.degree(v, lambda).ln();
            }
            let tau = 1.0 / (1.0 + sum);
            if best.is_none_or(|b| tau > b) {
                *best = Some(tau);
            }
            return;
        }
        if path.len() - 1 == max_hops {
            return;
        }
        let next: BTreeSet<String> = usable
            .iter()
            .filter_map(|e| {
                if e.0 == here {
                    Some(e.2.clone())
                } else if e.2 == here {
                    Some(e.0.clone())
                } else {
                    None
                }
            })
            .collect();
        for n in next {
            if path.contains(&n) {
                continue;
            }
            path.push(n);
            walk(g, usable, target, max_hops, lambda, path, best);
            path.pop();
        }
    }
    if s != o {
        walk(g, &usable, o, max_hops, lambda, &mut path, &mut best);
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleVerdict {
    Confirmed,
    Contradicted,
    Supported,
    Unknown,
}

/// Exact match, then a stored negated edge, then path proximity.
pub fn oracle_verdict(
    g: &PlainGraph,
    negations: &[(&str, &str)],
    claim: (&str, &str, &str),
    theta: f64,
    max_hops: usize,
    lambda: f64,
) -> (OracleVerdict, f64) {
    let (s, p, o) = claim;
    let stored = |pred: &str| g.edges.iter().any(|e| e.0 == s && e.1 == pred && e.2 == o);
    if stored(p) {
        return (OracleVerdict::Confirmed, 1.0);
    }
    let negated = negations.iter().find_map(|&(a, b)| {
        if a == p {
            Some(b)
        } else if b == p {
            Some(a)
        } else {
            None
        }
    });
    if negated.is_some_and(stored) {
        return (OracleVerdict::Contradicted, 0.0);
    }
    match brute_force_proximity(g, claim, max_hops, lambda) {
        Some(tau) if tau >= theta => (OracleVerdict::Supported, tau),
        Some(tau) => (OracleVerdict::Unknown, tau),
        None => (OracleVerdict::Unknown, 0.0),
    }
}

pub fn node(i: usize) -> Term {
    Term::iri(format!("http://example.org/g/n{i}")).unwrap()
}

pub fn pred(i: usize) -> Term {
    Term::iri(format!("http://example.org/g/p{i}")).unwrap()
}
