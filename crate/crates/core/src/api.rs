//! JSON bodies exchanged between the curation service and its clients.

use serde::{Deserialize, Serialize};

use crate::extraction::SentenceFailure;
use crate::kg::Triple;
use crate::media::{MediaId, MediaSource, MediaType, Span};
use crate::record::{ExtractionMode, RecordId, ReviewAction, ReviewState, TrustChannel};
use crate::scoring::{AccuracyScore, DocumentReport};
use crate::veracity::VeracityVerdict;

/// `POST /documents`. Exactly one of `url` or `text` must be set. `filename`
/// or `media_type` select the text extractor for inline content.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmitDocumentRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub url: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filename: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub media_type: Option<MediaType>,
    pub trust_channel: TrustChannel,
    /// When absent the document is only ingested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<ExtractionMode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmitDocumentResponse {
    pub media_id: MediaId,
    pub record_ids: Vec<RecordId>,
    #[serde(default)]
    pub failures: Vec<SentenceFailure>,
    #[serde(default)]
    pub rejected: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractRequest {
    pub mode: ExtractionMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReviewRequest {
    pub action: ReviewAction,
    pub reviewer: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// `POST /check`. Each field is an absolute IRI, `<iri>`, a prefixed name
/// known to the graph, or a plain phrase that is aligned first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRequest {
    pub subject: String,
    pub predicate: String,
    pub object: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResponse {
    pub claim: Triple,
    #[serde(flatten)]
    pub verdict: VeracityVerdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KgStats {
    pub triples: usize,
    pub nodes: usize,
    pub pending_records: usize,
}

/// `POST /kg/import`: pre-approved ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportRequest {
    pub turtle: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sidecar: Option<String>,
    /// Citation recorded on triples that have no sidecar entry.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImportResponse {
    pub inserted: usize,
    pub merged: usize,
    pub triples: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatementView {
    pub record_id: RecordId,
    pub span: Span,
    pub sentence: String,
    pub triple: Triple,
    pub review_state: ReviewState,
    pub color: String,
    pub verdict: VeracityVerdict,
    pub score: AccuracyScore,
}

/// `GET /documents/{media_id}/report`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentReportView {
    pub media_id: MediaId,
    pub source: MediaSource,
    pub trust_channel: TrustChannel,
    pub text: String,
    pub statements: Vec<StatementView>,
    /// Set when the document yielded no statements; `report` is then absent.
    pub empty_document: bool,
    pub report: Option<DocumentReport>,
    #[serde(default)]
    pub failures: Vec<SentenceFailure>,
}

/// Entry of `GET /documents`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentSummary {
    pub media_id: MediaId,
    pub source: MediaSource,
    pub media_type: MediaType,
    pub trust_channel: TrustChannel,
    pub record_ids: Vec<RecordId>,
}
