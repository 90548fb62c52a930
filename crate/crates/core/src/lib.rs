//! Knowledge-graph fact checking.
//!
//! Media text is segmented into sentences, turned into subject-predicate-object
//! candidates, filtered against the source sentence, aligned to canonical graph
//! terms and finally checked against a trusted ground-truth graph. A claim is
//! either found verbatim ([`veracity::Verdict::Confirmed`]), contradicted by a
//! negated edge, or approximated by the degree-penalised proximity of the best
//! path between its endpoints. Per-statement metric scores are folded into a
//! weighted accuracy score by [`scoring`].

pub mod align;
pub mod api;
pub mod extraction;
pub mod kg;
pub mod media;
pub mod record;
pub mod scoring;
pub mod text;
pub mod veracity;

pub use align::AlignmentTables;
pub use kg::{KnowledgeGraph, StatementAnnotation, Term, Triple};
pub use media::{MediaDocument, MediaId};
pub use record::{RecordId, ReviewState, StatementRecord, TrustChannel};
pub use scoring::{AccuracyScore, DocumentReport, MetricRegistry, WeightConfig};
pub use veracity::{ProximityConfig, Verdict, VeracityVerdict};
