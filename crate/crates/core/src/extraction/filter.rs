use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::align::AlignmentTables;
use crate::media::Sentence;
use crate::text;

use super::CandidateTriple;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    SubjectNotInSource,
    ObjectNotInSource,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FilterOutcome {
    pub kept: Vec<CandidateTriple>,
    pub rejected: Vec<(CandidateTriple, RejectReason)>,
}

/// Lemmatized, non-stopword tokens.
pub fn content_tokens(phrase: &str, tables: &AlignmentTables) -> Vec<String> {
    tables.lemmatize(phrase).into_iter().filter(|t| !text::is_stopword(t)).collect()
}

/// Keeps a candidate only when every content token of its subject and object
/// occurs in the sentence. The predicate is not checked.
pub fn filter_hallucinations(
    candidates: Vec<CandidateTriple>,
    sentence: &Sentence,
    tables: &AlignmentTables,
) -> FilterOutcome {
    let source: BTreeSet<String> = tables.lemmatize(&sentence.text).into_iter().collect();
    let grounded = |phrase: &str| content_tokens(phrase, tables).iter().all(|t| source.contains(t));
    let mut outcome = FilterOutcome::default();
    for c in candidates {
        if !grounded(&c.raw_subject) {
            outcome.rejected.push((c, RejectReason::SubjectNotInSource));
        } else if !grounded(&c.raw_object) {
            outcome.rejected.push((c, RejectReason::ObjectNotInSource));
        } else {
            outcome.kept.push(c);
        }
    }
    outcome
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extraction::ExtractorKind;
    use crate::media::Span;

    fn c(s: &str, p: &str, o: &str) -> CandidateTriple {
        CandidateTriple {
            raw_subject: s.into(),
            raw_predicate: p.into(),
            raw_object: o.into(),
            sentence_index: 0,
            extractor: ExtractorKind::Remote { model: "m".into() },
            attempt: 0,
        }
    }

    fn sentence(text: &str) -> Sentence {
        Sentence { index: 0, text: text.into(), span: Span { start: 0, end: text.chars().count() } }
    }

    #[test]
    fn token_presence() {
        let tables = AlignmentTables::default();
        let s = sentence("CO2 causes warming");
        let out = filter_hallucinations(
            vec![c("unicorns", "cause", "warming"), c("CO2", "causes", "warming"), c("co2", "CAUSES", "Warming")],
            &s,
            &tables,
        );
        assert_eq!(out.kept.len(), 2);
        assert_eq!(out.rejected.len(), 1);
        assert_eq!(out.rejected[0].1, RejectReason::SubjectNotInSource);
    }

    #[test]
    fn object_checked_and_predicate_exempt() {
        let tables = AlignmentTables::default();
        let s = sentence("CO2 causes warming");
        let out = filter_hallucinations(vec![c("CO2", "leads to", "cooling")], &s, &tables);
        assert_eq!(out.rejected[0].1, RejectReason::ObjectNotInSource);
        let out = filter_hallucinations(vec![c("CO2", "results in", "the warming")], &s, &tables);
        assert_eq!(out.kept.len(), 1);
    }

    #[test]
    fn lemma_normalized_match() {
        let tables = AlignmentTables::from_json(r#"{"lemmas": {"temperatures": "temperature"}}"#).unwrap();
        let s = sentence("Temperatures rise quickly");
        let out = filter_hallucinations(vec![c("temperature", "rises", "quickly")], &s, &tables);
        assert_eq!(out.kept.len(), 1);
    }
}
