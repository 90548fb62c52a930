//! In-memory curation state and the operations that change it.
//!
//! Everything here is synchronous and deterministic given its inputs; the
//! HTTP layer serializes calls through a single writer.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};
use factcheck_core::api::{DocumentReportView, DocumentSummary, ImportResponse, KgStats, StatementView};
use factcheck_core::extraction::{DocumentExtraction, SentenceFailure};
use factcheck_core::kg::{InsertOutcome, PrefixTable};
use factcheck_core::media::MediaSource;
use factcheck_core::record::{ReviewAction, ReviewEvent};
use factcheck_core::scoring::score_document;
use factcheck_core::veracity::check_veracity;
use factcheck_core::{
    KnowledgeGraph, MediaDocument, MediaId, MetricRegistry, ProximityConfig, RecordId, ReviewState,
    StatementAnnotation, StatementRecord, Term, Triple, TrustChannel, WeightConfig,
};
use serde::{Deserialize, Serialize};

use crate::error::ServiceError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredDocument {
    pub document: MediaDocument,
    pub trust_channel: TrustChannel,
    pub record_ids: Vec<RecordId>,
    #[serde(default)]
    pub failures: Vec<SentenceFailure>,
}

impl StoredDocument {
    pub fn summary(&self) -> DocumentSummary {
        DocumentSummary {
            media_id: self.document.media_id.clone(),
            source: self.document.source.clone(),
            media_type: self.document.media_type,
            trust_channel: self.trust_channel,
            record_ids: self.record_ids.clone(),
        }
    }

    /// Citation stored on ground-truth triples approved from this document.
    pub fn source_ref(&self) -> String {
        match &self.document.source {
            MediaSource::Url(url) => url.clone(),
            MediaSource::LocalFile(path) => path.display().to_string(),
            MediaSource::InlineText => format!("media:{}", self.document.media_id),
        }
    }
}

/// `bootstrap` holds imported ground truth only; `kg` adds approved
/// statements on top of it.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CurationState {
    pub bootstrap: KnowledgeGraph,
    pub kg: KnowledgeGraph,
    pub documents: BTreeMap<MediaId, StoredDocument>,
    pub records: BTreeMap<RecordId, StatementRecord>,
    pub events: Vec<ReviewEvent>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AddOutcome {
    Added,
    Existing,
}

impl CurationState {
    pub fn new(negations: &[(Term, Term)]) -> Result<Self, ServiceError> {
        let mut state = Self::default();
        state.apply_negations(negations)?;
        Ok(state)
    }

    pub fn apply_negations(&mut self, negations: &[(Term, Term)]) -> Result<(), ServiceError> {
        for (a, b) in negations {
            self.bootstrap.add_negation(a.clone(), b.clone())?;
            self.kg.add_negation(a.clone(), b.clone())?;
        }
        Ok(())
    }

    pub fn document(&self, media_id: &MediaId) -> Result<&StoredDocument, ServiceError> {
        self.documents.get(media_id).ok_or_else(|| ServiceError::NotFound(format!("document {media_id}")))
    }

    pub fn record(&self, id: &RecordId) -> Result<&StatementRecord, ServiceError> {
        self.records.get(id).ok_or_else(|| ServiceError::NotFound(format!("record {id}")))
    }

    /// Registers a document. Re-submitting identical content is a no-op; a
    /// different trust channel for the same media id is a conflict.
    pub fn add_document(
        &mut self,
        document: MediaDocument,
        trust_channel: TrustChannel,
    ) -> Result<AddOutcome, ServiceError> {
        if let Some(existing) = self.documents.get(&document.media_id) {
            if existing.trust_channel != trust_channel {
                return Err(ServiceError::Conflict(format!(
                    "document {} was already submitted as {:?}",
                    document.media_id, existing.trust_channel
                )));
            }
            return Ok(AddOutcome::Existing);
        }
        let media_id = document.media_id.clone();
        self.documents
            .insert(media_id, StoredDocument { document, trust_channel, record_ids: Vec::new(), failures: Vec::new() });
        Ok(AddOutcome::Added)
    }

    fn has_events(&self, id: &RecordId) -> bool {
        self.events.iter().any(|e| &e.record_id == id)
    }

    /// Replaces the document's unreviewed records with a fresh extraction.
    /// Records with review history are kept as they are. Untrusted records
    /// get a verdict against the current graph.
    pub fn apply_extraction(
        &mut self,
        media_id: &MediaId,
        extraction: DocumentExtraction,
        proximity: &ProximityConfig,
    ) -> Result<Vec<RecordId>, ServiceError> {
        let trust_channel = self.document(media_id)?.trust_channel;
        let old: Vec<RecordId> = self.documents[media_id].record_ids.clone();
        for id in old {
            if !self.has_events(&id) {
                self.records.remove(&id);
            }
        }
        let mut fresh = Vec::with_capacity(extraction.records.len());
        for mut record in extraction.records {
            fresh.push(record.record_id.clone());
            if self.records.contains_key(&record.record_id) {
                continue;
            }
            record.trust_channel = trust_channel;
            if trust_channel == TrustChannel::UntrustedMedia {
                record.verdict = Some(check_veracity(&self.kg, &record.triple, proximity)?);
            }
            self.records.insert(record.record_id.clone(), record);
        }
        let ids: BTreeSet<RecordId> = self
            .records
            .values()
            .filter(|r| r.media_ids.contains(media_id))
            .map(|r| r.record_id.clone())
            .collect();
        let doc = self.documents.get_mut(media_id).expect("checked above");
        doc.record_ids = ids.into_iter().collect();
        doc.failures = extraction.failures;
        Ok(fresh)
    }

    pub fn review(
        &mut self,
        id: &RecordId,
        action: ReviewAction,
        reviewer: &str,
        note: Option<String>,
        at: DateTime<Utc>,
    ) -> Result<StatementRecord, ServiceError> {
        let reviewer = reviewer.trim();
        if reviewer.is_empty() {
            return Err(ServiceError::Validation("reviewer must not be empty".into()));
        }
        let event = ReviewEvent {
            seq: self.events.len() as u64 + 1,
            record_id: id.clone(),
            action,
            reviewer: reviewer.to_string(),
            timestamp: at,
            note,
        };
        self.apply_event(&event)?;
        self.events.push(event);
        Ok(self.records[id].clone())
    }

    /// Approving a trusted record inserts its triple into the graph.
    /// Reopening leaves the graph untouched.
    fn apply_event(&mut self, event: &ReviewEvent) -> Result<(), ServiceError> {
        let record = self
            .records
            .get_mut(&event.record_id)
            .ok_or_else(|| ServiceError::NotFound(format!("record {}", event.record_id)))?;
        record.apply_review(event.action, &event.reviewer, event.timestamp)?;
        if event.action == ReviewAction::Approve && record.trust_channel == TrustChannel::TrustedSource {
            let refs: Vec<String> = record
                .media_ids
                .iter()
                .filter_map(|m| self.documents.get(m))
                .map(StoredDocument::source_ref)
                .collect();
            let annotation =
                StatementAnnotation::new(record.media_ids.clone(), 1.0, event.timestamp).with_source_refs(refs);
            self.kg.insert(record.triple.clone(), annotation)?;
        }
        Ok(())
    }

    /// Adds pre-approved ground truth to both the bootstrap and live graph.
    pub fn import(
        &mut self,
        entries: Vec<(Triple, StatementAnnotation)>,
        prefixes: &PrefixTable,
    ) -> Result<ImportResponse, ServiceError> {
        let (mut inserted, mut merged) = (0, 0);
        self.bootstrap.add_prefixes(prefixes);
        self.kg.add_prefixes(prefixes);
        for (triple, annotation) in entries {
            self.bootstrap.insert(triple.clone(), annotation.clone())?;
            match self.kg.insert(triple, annotation)? {
                InsertOutcome::Inserted => inserted += 1,
                InsertOutcome::Merged => merged += 1,
            }
        }
        Ok(ImportResponse { inserted, merged, triples: self.kg.len() })
    }

    /// Rebuilds records and graph from the bootstrap graph and the review
    /// log alone.
    pub fn replay(&self) -> Result<CurationState, ServiceError> {
        let mut state = CurationState {
            bootstrap: self.bootstrap.clone(),
            kg: self.bootstrap.clone(),
            documents: self.documents.clone(),
            records: self.records.clone(),
            events: Vec::new(),
        };
        for record in state.records.values_mut() {
            record.reset_review();
        }
        for event in &self.events {
            state.apply_event(event)?;
            state.events.push(event.clone());
        }
        Ok(state)
    }

    pub fn stats(&self) -> KgStats {
        KgStats {
            triples: self.kg.len(),
            nodes: self.kg.node_count(),
            pending_records: self.records.values().filter(|r| r.review_state == ReviewState::Pending).count(),
        }
    }

    pub fn records_in(&self, state: Option<ReviewState>, media_id: Option<&MediaId>) -> Vec<StatementRecord> {
        self.records
            .values()
            .filter(|r| state.is_none_or(|s| r.review_state == s))
            .filter(|r| media_id.is_none_or(|m| r.media_ids.contains(m)))
            .cloned()
            .collect()
    }

    /// Scores the document's statements against the current graph. Rejected
    /// records are left out.
    pub fn report(
        &self,
        media_id: &MediaId,
        weights: &WeightConfig,
        registry: &MetricRegistry,
        proximity: &ProximityConfig,
    ) -> Result<DocumentReportView, ServiceError> {
        let doc = self.document(media_id)?;
        let mut records: Vec<StatementRecord> = doc
            .record_ids
            .iter()
            .filter_map(|id| self.records.get(id))
            .filter(|r| r.review_state != ReviewState::Rejected)
            .cloned()
            .collect();
        records.sort_by(|a, b| (a.span.start, &a.record_id).cmp(&(b.span.start, &b.record_id)));
        for r in &mut records {
            r.verdict = Some(check_veracity(&self.kg, &r.triple, proximity)?);
        }
        let report = if records.is_empty() {
            None
        } else {
            Some(score_document(&records, weights, registry).map_err(|e| ServiceError::Internal(e.to_string()))?)
        };
        let statements = match &report {
            None => Vec::new(),
            Some(report) => records
                .into_iter()
                .zip(&report.statements)
                .map(|(r, s)| {
                    let verdict = r.verdict.expect("set above");
                    StatementView {
                        record_id: r.record_id,
                        span: r.span,
                        sentence: r.sentence,
                        triple: r.triple,
                        review_state: r.review_state,
                        color: verdict.verdict.color().to_string(),
                        verdict,
                        score: s.score.clone(),
                    }
                })
                .collect(),
        };
        Ok(DocumentReportView {
            media_id: media_id.clone(),
            source: doc.document.source.clone(),
            trust_channel: doc.trust_channel,
            text: doc.document.text.clone(),
            empty_document: report.is_none(),
            statements,
            report,
            failures: doc.failures.clone(),
        })
    }
}
