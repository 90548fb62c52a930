//! JSON-lines annotation sidecar: one object per stored triple.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{KnowledgeGraph, StatementAnnotation, Term, Triple};
use crate::media::MediaId;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("sidecar line {line}: {message}")]
pub struct SidecarError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SidecarEntry {
    pub subject: Term,
    pub predicate: Term,
    pub object: Term,
    pub media_ids: Vec<MediaId>,
    pub confidence: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objectivity: Option<f64>,
    pub asserted_at: DateTime<Utc>,
    #[serde(default)]
    pub source_refs: Vec<String>,
}

impl SidecarEntry {
    pub fn new(triple: &Triple, a: &StatementAnnotation) -> Self {
        Self {
            subject: triple.subject().clone(),
            predicate: triple.predicate().clone(),
            object: triple.object().clone(),
            media_ids: a.media_ids.clone(),
            confidence: a.confidence,
            objectivity: a.objectivity,
            asserted_at: a.asserted_at,
            source_refs: a.source_refs.clone(),
        }
    }

    pub fn into_parts(self) -> Result<(Triple, StatementAnnotation), String> {
        let triple = Triple::new(self.subject, self.predicate, self.object).map_err(|e| e.to_string())?;
        let annotation = StatementAnnotation {
            media_ids: self.media_ids,
            confidence: self.confidence,
            objectivity: self.objectivity,
            asserted_at: self.asserted_at,
            source_refs: self.source_refs,
        };
        annotation.validate().map_err(|e| e.to_string())?;
        Ok((triple, annotation))
    }
}

/// Serializes every annotation in triple order.
pub fn write_sidecar(graph: &KnowledgeGraph) -> String {
    let mut out = String::new();
    for (triple, annotation) in graph.annotations() {
        let line = serde_json::to_string(&SidecarEntry::new(triple, annotation))
            .expect("sidecar entries always serialize");
        out.push_str(&line);
        out.push('\n');
    }
    out
}

/// Parses a sidecar; blank lines are skipped, line numbers are 1-based.
pub fn read_sidecar(input: &str) -> Result<Vec<(Triple, StatementAnnotation)>, SidecarError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| SidecarError { line: i + 1, message };
        let entry: SidecarEntry = serde_json::from_str(line).map_err(|e| err(e.to_string()))?;
        out.push(entry.into_parts().map_err(err)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    #[test]
    fn round_trip_through_graph() {
        let mut g = KnowledgeGraph::new();
        let t = Triple::new(
            Term::iri("http://ex/a").unwrap(),
            Term::iri("http://ex/label").unwrap(),
            Term::literal("A"),
        )
        .unwrap();
        let mut a = StatementAnnotation::new(
            vec![MediaId::for_content(b"x").unwrap()],
            0.75,
            Utc.timestamp_opt(1_700_000_000, 123_456_789).unwrap(),
        )
        .with_source_refs(["IPCC AR6 WG1 SPM A.1".to_string()]);
        a.objectivity = Some(0.3);
        g.insert(t.clone(), a.clone()).unwrap();

        let text = write_sidecar(&g);
        assert_eq!(text.lines().count(), 1);
        let parsed = read_sidecar(&text).unwrap();
        assert_eq!(parsed, vec![(t, a)]);
    }

    #[test]
    fn bad_line_reports_number() {
        let input = "\n{\"subject\":\"http://a\"}\n";
        let err = read_sidecar(input).unwrap_err();
        assert_eq!(err.line, 2);
    }

    #[test]
    fn invalid_confidence_rejected() {
        let line = r#"{"subject":"http://a","predicate":"http://p","object":"http://o","media_ids":["0123456789abcdef"],"confidence":2.0,"asserted_at":"2024-01-01T00:00:00Z","source_refs":[]}"#;
        assert!(read_sidecar(line).unwrap_err().message.contains("confidence"));
    }
}
