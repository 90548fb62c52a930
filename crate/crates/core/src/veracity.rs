//! Veracity of an aligned claim against the trusted graph.
//!
//! Precedence is exact match, then negated match, then path proximity. The
//! proximity of a path `s = v0, v1, ..., vn = o` is
//!
//! ```text
//! tau = 1 / (1 + sum_{0 < i < n} ln k(v_i))
//! k(v) = max(1, lambda * |incoming(v)| + |outgoing(v)|)
//! ```
//!
//! so paths through generic, highly connected nodes score lower. Edges are
//! traversed in either direction and the claim edge itself is never used.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use crate::kg::{DegreeDirection, KnowledgeGraph, StatementAnnotation, Term, Triple};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VeracityError {
    #[error("claim subject and object are the same node `{0}`")]
    DegenerateClaim(String),
    #[error("invalid proximity config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Traversal {
    #[default]
    Undirected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProximityConfig {
    pub theta: f64,
    pub max_hops: usize,
    /// Multiplier on incoming-edge counts in the effective degree.
    pub incoming_weight: f64,
    pub traversal: Traversal,
}

impl Default for ProximityConfig {
    fn default() -> Self {
        Self { theta: 0.5, max_hops: 6, incoming_weight: 1.0, traversal: Traversal::Undirected }
    }
}

impl ProximityConfig {
    pub fn validate(&self) -> Result<(), VeracityError> {
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(VeracityError::InvalidConfig(format!("theta {} not in (0, 1)", self.theta)));
        }
        if self.max_hops < 1 {
            return Err(VeracityError::InvalidConfig("max_hops must be at least 1".into()));
        }
        if !(self.incoming_weight >= 0.0 && self.incoming_weight.is_finite()) {
            return Err(VeracityError::InvalidConfig(format!(
                "incoming_weight {} must be >= 0",
                self.incoming_weight
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Confirmed,
    Supported,
    Contradicted,
    Unknown,
}

impl Verdict {
    pub const ALL: [Verdict; 4] = [Verdict::Confirmed, Verdict::Supported, Verdict::Contradicted, Verdict::Unknown];

    /// Display colour used by reports and the review UI.
    pub fn color(self) -> &'static str {
        match self {
            Verdict::Confirmed => "green",
            Verdict::Supported => "yellow",
            Verdict::Unknown => "gray",
            Verdict::Contradicted => "red",
        }
    }
}

/// Whether an evidence edge was walked subject→object or against it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathDirection {
    Forward,
    Backward,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathEdge {
    pub triple: Triple,
    pub direction: PathDirection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathEvidence {
    pub nodes: Vec<Term>,
    pub edges: Vec<PathEdge>,
    /// Effective degree of every interior node, in path order.
    pub intermediate_degrees: Vec<f64>,
    pub proximity: f64,
}

impl PathEvidence {
    pub fn hops(&self) -> usize {
        self.edges.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Evidence {
    ExactMatch { triple: Triple, annotation: StatementAnnotation },
    NegationMatch { triple: Triple, annotation: StatementAnnotation },
    Path(PathEvidence),
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VeracityVerdict {
    pub verdict: Verdict,
    pub veracity: f64,
    pub evidence: Evidence,
    pub threshold_used: f64,
}

pub fn effective_degree(graph: &KnowledgeGraph, node: &Term, incoming_weight: f64) -> f64 {
    let incoming = graph.degree(node, DegreeDirection::In) as f64;
    let outgoing = graph.degree(node, DegreeDirection::Out) as f64;
    (incoming_weight * incoming + outgoing).max(1.0)
}

/// `1 / (1 + sum ln k)`, summed in the given order.
pub fn proximity_from_degrees(degrees: &[f64]) -> f64 {
    1.0 / (1.0 + degrees.iter().fold(0.0, |acc, k| acc + k.ln()))
}

pub fn check_exact(graph: &KnowledgeGraph, claim: &Triple) -> Option<(Triple, StatementAnnotation)> {
    graph.annotation(claim).map(|a| (claim.clone(), a.clone()))
}

/// Finds a stored `(s, q, o)` where `q` negates the claim predicate.
pub fn check_contradiction(graph: &KnowledgeGraph, claim: &Triple) -> Option<(Triple, StatementAnnotation)> {
    let negated = graph.negation_of(claim.predicate())?;
    let flipped = claim.with_predicate(negated.clone()).ok()?;
    check_exact(graph, &flipped)
}

struct Frontier<'g> {
    cost: f64,
    path: Vec<&'g Term>,
}

impl Frontier<'_> {
    fn key(&self) -> (f64, usize) {
        (self.cost, self.path.len())
    }
}

impl PartialEq for Frontier<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Frontier<'_> {}

impl PartialOrd for Frontier<'_> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Frontier<'_> {
    // Reversed: BinaryHeap pops the cheapest, then shortest, then
    // lexicographically smallest path first.
    fn cmp(&self, other: &Self) -> Ordering {
        let (ca, ha) = self.key();
        let (cb, hb) = other.key();
        cb.total_cmp(&ca).then(hb.cmp(&ha)).then_with(|| other.path.cmp(&self.path))
    }
}

/// Highest-proximity path from claim subject to claim object within
/// `max_hops` edges. Ties go to fewer hops, then the lexicographically
/// smallest node sequence.
pub fn proximity_path(
    graph: &KnowledgeGraph,
    claim: &Triple,
    config: &ProximityConfig,
) -> Result<Option<PathEvidence>, VeracityError> {
    config.validate()?;
    let source = claim.subject();
    let target = claim.object();
    if source == target {
        return Err(VeracityError::DegenerateClaim(source.value().to_string()));
    }
    if graph.degree(source, DegreeDirection::Both) == 0 || graph.degree(target, DegreeDirection::Both) == 0 {
        return Ok(None);
    }

    let mut leave_cost: HashMap<&Term, f64> = HashMap::new();
    let mut settled: HashMap<&Term, usize> = HashMap::new();
    let mut heap = BinaryHeap::new();
    heap.push(Frontier { cost: 0.0, path: vec![source] });

    // Minimum-cost search over walks; costs are non-negative so the first
    // time the target is popped its walk is optimal, and an optimal walk is
    // always a simple path.
    let best = loop {
        let Some(state) = heap.pop() else { break None };
        let node = *state.path.last().expect("paths are non-empty");
        if node == target {
            break Some(state);
        }
        let hops = state.path.len() - 1;
        if settled.get(node).is_some_and(|&h| h <= hops) {
            continue;
        }
        settled.insert(node, hops);
        if hops >= config.max_hops {
            continue;
        }
        let step = if node == source {
            0.0
        } else {
            *leave_cost
                .entry(node)
                .or_insert_with(|| effective_degree(graph, node, config.incoming_weight).ln())
        };
        let cost = state.cost + step;
        let next_nodes = graph
            .outgoing(node)
            .filter(|t| *t != claim)
            .map(Triple::object)
            .chain(graph.incoming(node).filter(|t| *t != claim).map(Triple::subject));
        for next in next_nodes {
            if settled.get(next).is_some_and(|&h| h <= hops + 1) {
                continue;
            }
            let mut path = state.path.clone();
            path.push(next);
            heap.push(Frontier { cost, path });
        }
    };

    Ok(best.map(|state| build_evidence(graph, claim, &state.path, config.incoming_weight)))
}

fn build_evidence(graph: &KnowledgeGraph, claim: &Triple, path: &[&Term], incoming_weight: f64) -> PathEvidence {
    let edges = path
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let forward = graph
                .outgoing(a)
                .filter(|t| *t != claim && t.object() == b)
                .map(|t| PathEdge { triple: t.clone(), direction: PathDirection::Forward });
            let backward = graph
                .incoming(a)
                .filter(|t| *t != claim && t.subject() == b)
                .map(|t| PathEdge { triple: t.clone(), direction: PathDirection::Backward });
            forward
                .chain(backward)
                .min_by(|x, y| x.triple.cmp(&y.triple))
                .expect("consecutive path nodes share an edge")
        })
        .collect();
    let intermediate_degrees: Vec<f64> = path[1..path.len() - 1]
        .iter()
        .map(|v| effective_degree(graph, v, incoming_weight))
        .collect();
    PathEvidence {
        nodes: path.iter().map(|t| (*t).clone()).collect(),
        edges,
        proximity: proximity_from_degrees(&intermediate_degrees),
        intermediate_degrees,
    }
}

pub fn check_veracity(
    graph: &KnowledgeGraph,
    claim: &Triple,
    config: &ProximityConfig,
) -> Result<VeracityVerdict, VeracityError> {
    config.validate()?;
    let threshold_used = config.theta;
    if let Some((triple, annotation)) = check_exact(graph, claim) {
        return Ok(VeracityVerdict {
            verdict: Verdict::Confirmed,
            veracity: 1.0,
            evidence: Evidence::ExactMatch { triple, annotation },
            threshold_used,
        });
    }
    if let Some((triple, annotation)) = check_contradiction(graph, claim) {
        return Ok(VeracityVerdict {
            verdict: Verdict::Contradicted,
            veracity: 0.0,
            evidence: Evidence::NegationMatch { triple, annotation },
            threshold_used,
        });
    }
    Ok(match proximity_path(graph, claim, config)? {
        Some(path) => VeracityVerdict {
            verdict: if path.proximity >= config.theta { Verdict::Supported } else { Verdict::Unknown },
            veracity: path.proximity,
            evidence: Evidence::Path(path),
            threshold_used,
        },
        None => VeracityVerdict { verdict: Verdict::Unknown, veracity: 0.0, evidence: Evidence::None, threshold_used },
    })
}
