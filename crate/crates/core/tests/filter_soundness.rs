mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::*;
use factcheck_core::align::AlignmentTables;
use factcheck_core::extraction::{filter_hallucinations, CandidateTriple, ExtractorKind};
use factcheck_core::media::{Sentence, Span};
use factcheck_core::text::STOPWORDS;
use proptest::prelude::*;

const VOCAB: &[&str] = &[
    "CO2", "co2", "concentration", "causes", "cause", "global", "warming", "Warming", "sea", "level",
    "levels", "rise", "the", "of", "a", "in", "temperatures", "temperature", "emissions", "emission",
    "oceans", "ocean", "human", "activity", "glaciers", "glacier", "melt", "heat-wave", "2030", "ice",
];

/// Lemma lookup read straight from the table file, followed to a fixed point.
fn lemma_map() -> BTreeMap<String, String> {
    let file: serde_json::Value = serde_json::from_str(&fixture("tables.json")).unwrap();
    file["lemmas"]
        .as_object()
        .unwrap()
        .iter()
        .map(|(k, v)| (k.to_lowercase(), v.as_str().unwrap().to_lowercase()))
        .collect()
}

fn words(s: &str) -> Vec<String> {
    s.split(|c: char| !c.is_alphanumeric()).filter(|w| !w.is_empty()).map(str::to_lowercase).collect()
}

fn base(lemmas: &BTreeMap<String, String>, w: &str) -> String {
    let mut w = w.to_string();
    while let Some(next) = lemmas.get(&w).filter(|n| **n != w) {
        w = next.clone();
    }
    w
}

/// True when every non-stopword of `phrase` appears in `sentence` up to lemma.
fn grounded(lemmas: &BTreeMap<String, String>, phrase: &str, sentence: &str) -> bool {
    let source: BTreeSet<String> = words(sentence).iter().map(|w| base(lemmas, w)).collect();
    words(phrase)
        .iter()
        .map(|w| base(lemmas, w))
        .all(|w| STOPWORDS.contains(&w.as_str()) || source.contains(&w))
}

fn phrase() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(VOCAB), 1..4).prop_map(|w| w.join(" "))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn kept_candidates_are_grounded(
        sentence in prop::collection::vec(prop::sample::select(VOCAB), 1..10).prop_map(|w| w.join(" ") + "."),
        pairs in prop::collection::vec((phrase(), phrase()), 1..5),
    ) {
        let tables = AlignmentTables::from_json(&fixture("tables.json")).unwrap();
        let lemmas = lemma_map();
        let s = Sentence { index: 0, span: Span { start: 0, end: sentence.chars().count() }, text: sentence.clone() };
        let candidates: Vec<CandidateTriple> = pairs
            .iter()
            .map(|(subj, obj)| CandidateTriple {
                raw_subject: subj.clone(),
                raw_predicate: "hallucinated verb".into(),
                raw_object: obj.clone(),
                sentence_index: 0,
                extractor: ExtractorKind::Remote { model: "fuzz".into() },
                attempt: 0,
            })
            .collect();
        let out = filter_hallucinations(candidates.clone(), &s, &tables);
        prop_assert_eq!(out.kept.len() + out.rejected.len(), candidates.len());
        for c in &out.kept {
            prop_assert!(grounded(&lemmas, &c.raw_subject, &sentence), "{c:?} in {sentence:?}");
            prop_assert!(grounded(&lemmas, &c.raw_object, &sentence), "{c:?} in {sentence:?}");
        }
        // The filter is also complete: nothing grounded is rejected.
        for (c, _) in &out.rejected {
            prop_assert!(!(grounded(&lemmas, &c.raw_subject, &sentence) && grounded(&lemmas, &c.raw_object, &sentence)));
        }
    }
}
