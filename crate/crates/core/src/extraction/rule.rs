use crate::media::{MediaId, Sentence};
use crate::text;

use super::{CandidateTriple, ExtractionError, ExtractorKind, TripleExtractor};

/// Verb phrases recognised by the rule-based extractor.
pub const DEFAULT_LEXICON: &[&str] = &[
    "accelerates", "affects", "amplifies", "cause", "caused", "causes", "contribute to",
    "contributes to", "decreases", "does not cause", "drive", "drives", "emits", "increase",
    "increases", "lead to", "leads to", "melts", "prevents", "produces", "raises", "reduce",
    "reduces", "results in", "threatens", "warms",
];

/// Splits a sentence around the first lexicon verb phrase. Yields at most one
/// candidate per sentence.
#[derive(Debug, Clone)]
pub struct RuleBasedExtractor {
    lexicon: Vec<Vec<String>>,
}

impl Default for RuleBasedExtractor {
    fn default() -> Self {
        Self::with_lexicon(DEFAULT_LEXICON.iter().copied())
    }
}

impl RuleBasedExtractor {
    pub fn with_lexicon<'a>(phrases: impl IntoIterator<Item = &'a str>) -> Self {
        let mut lexicon: Vec<Vec<String>> =
            phrases.into_iter().map(text::tokens).filter(|t| !t.is_empty()).collect();
        // Longest phrase first so that "leads to" wins over "leads".
        lexicon.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        lexicon.dedup();
        Self { lexicon }
    }

    pub fn extract_sentence(&self, sentence: &Sentence) -> Vec<CandidateTriple> {
        let s = sentence.text.as_str();
        let words = text::word_spans(s);
        for i in 0..words.len() {
            for phrase in &self.lexicon {
                let end = i + phrase.len();
                if end > words.len() || !words[i..end].iter().zip(phrase).all(|(w, p)| &w.lower == p) {
                    continue;
                }
                let subject = clean(&s[..words[i].start]);
                let predicate = &s[words[i].start..words[end - 1].end];
                let object = clean(&s[words[end - 1].end..]);
                if subject.is_empty() || object.is_empty() {
                    return Vec::new();
                }
                return vec![CandidateTriple {
                    raw_subject: subject.to_string(),
                    raw_predicate: predicate.to_string(),
                    raw_object: object.to_string(),
                    sentence_index: sentence.index,
                    extractor: ExtractorKind::RuleBased,
                    attempt: 0,
                }];
            }
        }
        Vec::new()
    }
}

fn clean(fragment: &str) -> &str {
    fragment.trim_matches(|c: char| c.is_whitespace() || matches!(c, '.' | '!' | '?' | ',' | ';' | ':'))
}

impl TripleExtractor for RuleBasedExtractor {
    fn kind(&self) -> ExtractorKind {
        ExtractorKind::RuleBased
    }

    fn extract(&self, _media_id: &MediaId, sentence: &Sentence) -> Result<Vec<CandidateTriple>, ExtractionError> {
        Ok(self.extract_sentence(sentence))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::media::Span;

    fn sentence(text: &str) -> Sentence {
        Sentence { index: 3, text: text.into(), span: Span { start: 0, end: text.chars().count() } }
    }

    fn triple(c: &CandidateTriple) -> (&str, &str, &str) {
        (&c.raw_subject, &c.raw_predicate, &c.raw_object)
    }

    #[test]
    fn lexicon_split() {
        let x = RuleBasedExtractor::default();
        let got = x.extract_sentence(&sentence("CO2 causes global warming"));
        assert_eq!(got.len(), 1);
        assert_eq!(triple(&got[0]), ("CO2", "causes", "global warming"));
        assert_eq!(got[0].sentence_index, 3);

        let got = x.extract_sentence(&sentence("Human activity increases CO2 concentration."));
        assert_eq!(triple(&got[0]), ("Human activity", "increases", "CO2 concentration"));
    }

    #[test]
    fn no_verb_no_triple() {
        let x = RuleBasedExtractor::default();
        assert!(x.extract_sentence(&sentence("Hello world")).is_empty());
        assert!(x.extract_sentence(&sentence("It warms.")).is_empty());
    }

    #[test]
    fn earliest_and_longest_phrase_wins() {
        let x = RuleBasedExtractor::default();
        let got = x.extract_sentence(&sentence("Deforestation leads to drought, which causes fires."));
        assert_eq!(triple(&got[0]), ("Deforestation", "leads to", "drought, which causes fires"));
        let got = x.extract_sentence(&sentence("Global warming does not cause volcanoes."));
        assert_eq!(triple(&got[0]), ("Global warming", "does not cause", "volcanoes"));
    }

    #[test]
    fn matches_whole_words_case_insensitively() {
        let x = RuleBasedExtractor::default();
        assert!(x.extract_sentence(&sentence("Becauses nothing")).is_empty());
        let got = x.extract_sentence(&sentence("Heat CAUSES stress"));
        assert_eq!(triple(&got[0]), ("Heat", "CAUSES", "stress"));
    }

    #[test]
    fn deterministic() {
        let x = RuleBasedExtractor::default();
        let s = sentence("Aerosols reduces sunlight.");
        assert_eq!(x.extract_sentence(&s), x.extract_sentence(&s));
    }
}
