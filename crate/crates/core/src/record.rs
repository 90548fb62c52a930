//! Extracted statements and their review life-cycle.

use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::extraction::{CandidateTriple, ExtractorKind};
use crate::kg::Triple;
use crate::media::{MediaId, Span};
use crate::veracity::VeracityVerdict;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RecordId(String);

impl RecordId {
    /// `<media>-<r|m><sentence>-<n>`; stable across re-extraction.
    pub fn new(media_id: &MediaId, kind: &ExtractorKind, sentence_index: usize, ordinal: usize) -> Self {
        let tag = match kind {
            ExtractorKind::RuleBased => 'r',
            ExtractorKind::Remote { .. } => 'm',
        };
        Self(format!("{media_id}-{tag}{sentence_index:03}-{ordinal}"))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for RecordId {
    fn from(s: &str) -> Self {
        Self(s.to_string())
    }
}

impl fmt::Display for RecordId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReviewState {
    Pending,
    Approved,
    Rejected,
}

impl std::str::FromStr for ReviewState {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "pending" => Ok(Self::Pending),
            "approved" => Ok(Self::Approved),
            "rejected" => Ok(Self::Rejected),
            other => Err(format!("unknown review state `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrustChannel {
    #[serde(alias = "trusted")]
    TrustedSource,
    #[serde(alias = "untrusted")]
    UntrustedMedia,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtractionMode {
    #[serde(alias = "rule_based")]
    Rule,
    Remote,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReviewAction {
    Approve,
    Reject,
    Reopen,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot {action:?} a record in state {state:?}")]
pub struct IllegalTransition {
    pub state: ReviewState,
    pub action: ReviewAction,
}

/// One entry of the append-only review log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReviewEvent {
    pub seq: u64,
    pub record_id: RecordId,
    pub action: ReviewAction,
    pub reviewer: String,
    pub timestamp: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatementRecord {
    pub record_id: RecordId,
    pub triple: Triple,
    pub candidate: CandidateTriple,
    pub media_ids: Vec<MediaId>,
    pub span: Span,
    pub sentence: String,
    pub review_state: ReviewState,
    pub trust_channel: TrustChannel,
    #[serde(default)]
    pub verdict: Option<VeracityVerdict>,
    #[serde(default)]
    pub reviewer: Option<String>,
    #[serde(default)]
    pub reviewed_at: Option<DateTime<Utc>>,
}

impl StatementRecord {
    /// Pending -> Approved | Rejected, Approved | Rejected -> Pending (reopen).
    pub fn apply_review(
        &mut self,
        action: ReviewAction,
        reviewer: &str,
        at: DateTime<Utc>,
    ) -> Result<(), IllegalTransition> {
        let next = match (self.review_state, action) {
            (ReviewState::Pending, ReviewAction::Approve) => ReviewState::Approved,
            (ReviewState::Pending, ReviewAction::Reject) => ReviewState::Rejected,
            (ReviewState::Approved | ReviewState::Rejected, ReviewAction::Reopen) => ReviewState::Pending,
            (state, action) => return Err(IllegalTransition { state, action }),
        };
        self.review_state = next;
        self.reviewer = Some(reviewer.to_string());
        self.reviewed_at = Some(at);
        Ok(())
    }

    /// Drops all review outcomes, as at submission time.
    pub fn reset_review(&mut self) {
        self.review_state = ReviewState::Pending;
        self.reviewer = None;
        self.reviewed_at = None;
    }
}
