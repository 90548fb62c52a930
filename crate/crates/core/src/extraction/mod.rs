//! Sentence-level claim extraction.
//!
//! [`extract_document`] runs segment → extract → filter → align for one
//! document. A failing sentence is reported in
//! [`DocumentExtraction::failures`] and never aborts the rest of the
//! document.

mod filter;
mod remote;
mod rule;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::align::{align_triple, AlignmentTables};
use crate::media::{segment_sentences, MediaDocument, MediaId, Sentence, Span};
use crate::record::{RecordId, ReviewState, StatementRecord, TrustChannel};

pub use filter::{content_tokens, filter_hallucinations, FilterOutcome, RejectReason};
pub use remote::{
    parse_response, AuditEntry, AuditLog, ChatMessage, ChatRequest, ChatTransport, ExtractorConfig,
    HttpTransport, RawTriple, RemoteExtractor, TransportError, DEFAULT_PROMPT_TEMPLATE,
};
pub use rule::{RuleBasedExtractor, DEFAULT_LEXICON};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ExtractorKind {
    RuleBased,
    Remote { model: String },
}

/// A raw subject-predicate-object split before alignment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateTriple {
    pub raw_subject: String,
    pub raw_predicate: String,
    pub raw_object: String,
    pub sentence_index: usize,
    pub extractor: ExtractorKind,
    pub attempt: u32,
}

impl CandidateTriple {
    pub fn is_well_formed(&self) -> bool {
        [&self.raw_subject, &self.raw_predicate, &self.raw_object].iter().all(|s| !s.trim().is_empty())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "reason")]
pub enum ExtractionError {
    #[error("extraction failed: {0}")]
    Failed(String),
    #[error("authentication error: {0}")]
    Auth(String),
    #[error("transport error: {0}")]
    Transport(String),
}

pub trait TripleExtractor: Send + Sync {
    fn kind(&self) -> ExtractorKind;

    fn extract(&self, media_id: &MediaId, sentence: &Sentence) -> Result<Vec<CandidateTriple>, ExtractionError>;

    /// Number of sentences processed concurrently.
    fn max_in_flight(&self) -> usize {
        1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceFailure {
    pub sentence_index: usize,
    pub span: Span,
    pub error: ExtractionError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectedCandidate {
    pub candidate: CandidateTriple,
    pub reason: RejectReason,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DocumentExtraction {
    pub records: Vec<StatementRecord>,
    pub rejected: Vec<RejectedCandidate>,
    pub failures: Vec<SentenceFailure>,
}

/// Extracts Pending statement records from a processed document.
pub fn extract_document(
    doc: &MediaDocument,
    extractor: &dyn TripleExtractor,
    tables: &AlignmentTables,
    trust_channel: TrustChannel,
) -> DocumentExtraction {
    let sentences = segment_sentences(&doc.text);
    let results = run_sentences(&doc.media_id, &sentences, extractor);

    let mut out = DocumentExtraction::default();
    for (sentence, result) in sentences.iter().zip(results) {
        let candidates = match result {
            Ok(c) => c,
            Err(error) => {
                log::warn!("media {} sentence {}: {error}", doc.media_id, sentence.index);
                out.failures.push(SentenceFailure { sentence_index: sentence.index, span: sentence.span, error });
                continue;
            }
        };
        let candidates: Vec<_> = candidates.into_iter().filter(CandidateTriple::is_well_formed).collect();
        let filtered = filter_hallucinations(candidates, sentence, tables);
        out.rejected.extend(
            filtered.rejected.into_iter().map(|(candidate, reason)| RejectedCandidate { candidate, reason }),
        );
        for (ordinal, candidate) in filtered.kept.into_iter().enumerate() {
            out.records.push(StatementRecord {
                record_id: RecordId::new(&doc.media_id, &candidate.extractor, sentence.index, ordinal),
                triple: align_triple(&candidate, tables),
                candidate,
                media_ids: vec![doc.media_id.clone()],
                span: sentence.span,
                sentence: sentence.text.clone(),
                review_state: ReviewState::Pending,
                trust_channel,
                verdict: None,
                reviewer: None,
                reviewed_at: None,
            });
        }
    }
    out
}

type SentenceResult = Result<Vec<CandidateTriple>, ExtractionError>;

fn run_sentences(media_id: &MediaId, sentences: &[Sentence], extractor: &dyn TripleExtractor) -> Vec<SentenceResult> {
    let workers = extractor.max_in_flight().clamp(1, sentences.len().max(1));
    if workers == 1 {
        return sentences.iter().map(|s| extractor.extract(media_id, s)).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<SentenceResult>>> = Mutex::new(vec![None; sentences.len()]);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(sentence) = sentences.get(i) else { break };
                let result = extractor.extract(media_id, sentence);
                slots.lock().unwrap_or_else(|p| p.into_inner())[i] = Some(result);
            });
        }
    });
    slots
        .into_inner()
        .unwrap_or_else(|p| p.into_inner())
        .into_iter()
        .map(|r| r.unwrap_or_else(|| Err(ExtractionError::Failed("worker did not run".into()))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::media::{MediaSource, MediaType};
    use chrono::Utc;

    fn doc(text: &str) -> MediaDocument {
        MediaDocument::process(MediaSource::InlineText, MediaType::PlainText, text.as_bytes().to_vec(), Utc::now())
            .unwrap()
    }

    struct FailSecond;

    impl TripleExtractor for FailSecond {
        fn kind(&self) -> ExtractorKind {
            ExtractorKind::Remote { model: "flaky".into() }
        }

        fn extract(&self, media_id: &MediaId, sentence: &Sentence) -> Result<Vec<CandidateTriple>, ExtractionError> {
            if sentence.index == 1 {
                return Err(ExtractionError::Failed("schema violation".into()));
            }
            let mut c = RuleBasedExtractor::default().extract(media_id, sentence)?;
            for x in &mut c {
                x.extractor = self.kind();
            }
            Ok(c)
        }

        fn max_in_flight(&self) -> usize {
            3
        }
    }

    #[test]
    fn two_sentence_article() {
        let d = doc("CO2 concentration causes global warming. CO2 concentration causes sea level rise.");
        let out = extract_document(&d, &RuleBasedExtractor::default(), &AlignmentTables::default(), TrustChannel::UntrustedMedia);
        assert_eq!(out.records.len(), 2);
        assert!(out.failures.is_empty());
        for r in &out.records {
            assert_eq!(r.span.slice(&d.text), Some(r.sentence.as_str()));
            assert_eq!(r.media_ids, vec![d.media_id.clone()]);
            assert_eq!(r.review_state, ReviewState::Pending);
        }
        assert_eq!(out.records[1].triple.object().local_name(), "sea_level_rise");
    }

    #[test]
    fn empty_document() {
        let mut d = doc("x");
        d.text.clear();
        let out = extract_document(&d, &RuleBasedExtractor::default(), &AlignmentTables::default(), TrustChannel::UntrustedMedia);
        assert!(out.records.is_empty() && out.failures.is_empty());
    }

    #[test]
    fn one_failing_sentence_is_isolated() {
        let d = doc("Heat causes drought. Drought causes fires. Fires cause smoke.");
        let out = extract_document(&d, &FailSecond, &AlignmentTables::default(), TrustChannel::UntrustedMedia);
        assert_eq!(out.records.len(), 2);
        assert_eq!(out.failures.len(), 1);
        assert_eq!(out.failures[0].sentence_index, 1);
        assert_eq!(out.records[0].candidate.sentence_index, 0);
        assert_eq!(out.records[1].candidate.sentence_index, 2);
    }
}
